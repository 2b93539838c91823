#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "spadapt/signals.hpp"
#include "spadapt/summary.hpp"

namespace spadapt {

using Json = nlohmann::ordered_json;

struct Column {
  std::string name;
  std::vector<double> values;
};

/// RFC 4180 CSV with a header row; numbers use round-trip precision.
void write_csv(const std::filesystem::path& path, const std::vector<Column>& columns);
std::string format_csv(const std::vector<Column>& columns);

/// Reads a numeric CSV with a header row into named columns.
std::vector<Column> read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Sidecar metadata for a dataset: kind, n, sigma, seed, max_level and the truth recipe.
Json dataset_sidecar(const Dataset& d);
/// Writes <stem>.csv (x, y for regression; l, k, y for white noise) and <stem>.json.
void write_dataset(const std::filesystem::path& dir, const std::string& stem, const Dataset& d);
/// Loads a dataset written by write_dataset.
Dataset read_dataset(const std::filesystem::path& csv_path);

/// Inclusion map keyed "l:k", log evidence and diagnostics.
Json summary_json(const PosteriorSummary& s);

std::string node_key(NodeIndex node);

}  // namespace spadapt
