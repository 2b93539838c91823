#include "spadapt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spadapt {

namespace {

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string format_csv(const std::vector<Column>& columns) {
  std::ostringstream out;
  std::size_t rows = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << quote(columns[c].name);
    if (c == 0) rows = columns[c].values.size();
    if (columns[c].values.size() != rows) throw ShapeError("format_csv: ragged columns");
  }
  out << "\r\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << number(columns[c].values[r]);
    out << "\r\n";
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns) {
  open_out(path) << format_csv(columns);
}

std::vector<Column> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ShapeError("read_csv: missing header in " + path.string());
  std::vector<Column> cols;
  for (const std::string& name : split_row(line)) cols.push_back({name, {}});
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    if (cells.size() != cols.size()) {
      throw ShapeError("read_csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                       " fields, expected " + std::to_string(cols.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        cols[c].values.push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        throw ShapeError("read_csv: non-numeric field at row " + std::to_string(row));
      }
    }
  }
  return cols;
}

void write_json(const std::filesystem::path& path, const Json& j) { open_out(path) << j.dump(2) << "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) { open_out(path) << text; }

std::string node_key(NodeIndex node) { return std::to_string(node.level) + ":" + std::to_string(node.k); }

Json dataset_sidecar(const Dataset& d) {
  Json j;
  j["kind"] = to_string(d.kind);
  j["n"] = d.n;
  j["sigma"] = d.sigma;
  j["seed"] = d.seed;
  if (d.kind == ModelKind::white_noise) j["max_level"] = d.max_level;
  j["truth"] = d.recipe.empty() ? Json::object() : Json::parse(d.recipe);
  return j;
}

void write_dataset(const std::filesystem::path& dir, const std::string& stem, const Dataset& d) {
  if (d.kind == ModelKind::regression) {
    write_csv(dir / (stem + ".csv"), {{"x", d.design}, {"y", d.y}});
  } else {
    std::vector<double> l(d.y.size()), k(d.y.size());
    for (std::size_t j = 0; j < d.y.size(); ++j) {
      const NodeIndex node = node_at(j);
      l[j] = node.level;
      k[j] = static_cast<double>(node.k);
    }
    write_csv(dir / (stem + ".csv"), {{"l", l}, {"k", k}, {"y", d.y}});
  }
  write_json(dir / (stem + ".json"), dataset_sidecar(d));
}

Dataset read_dataset(const std::filesystem::path& csv_path) {
  const auto cols = read_csv(csv_path);
  Dataset d;
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  Json meta;
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    meta = Json::parse(in);
  }
  auto find = [&](const std::string& name) -> const std::vector<double>* {
    for (const auto& c : cols) {
      if (c.name == name) return &c.values;
    }
    return nullptr;
  };
  const auto* x = find("x");
  const auto* y = find("y");
  if (!y) throw ShapeError("read_dataset: missing column 'y'");
  d.sigma = meta.value("sigma", 1.0);
  d.seed = meta.value("seed", std::uint64_t{0});
  if (meta.contains("truth")) d.recipe = meta["truth"].dump();
  if (x) {
    d.kind = ModelKind::regression;
    d.design = *x;
    d.y = *y;
    d.n = d.y.size();
  } else {
    d.kind = ModelKind::white_noise;
    d.y = *y;
    d.max_level = exact_log2(d.y.size()) - 1;
    d.n = meta.value("n", std::size_t{1} << d.max_level);
  }
  return d;
}

Json summary_json(const PosteriorSummary& s) {
  Json j;
  j["engine"] = s.engine;
  j["max_level"] = s.max_level;
  j["log_evidence"] = std::isfinite(s.log_evidence) ? Json(s.log_evidence) : Json(nullptr);
  Json inc = Json::object();
  for (std::size_t f = 1; f < s.inclusion.size(); ++f) {
    const NodeIndex node = node_at(f);
    if (node.level > s.max_level) break;
    inc[node_key(node)] = s.inclusion[f];
  }
  j["inclusion"] = inc;
  Json diag = Json::object();
  for (const auto& [k, v] : s.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  return j;
}

}  // namespace spadapt
