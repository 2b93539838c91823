#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "spadapt/io.hpp"

namespace spadapt::tools {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the TOML subset used by the bundled configs into a JSON object:
/// [table] and [a.b] headers, dotted and quoted keys, basic and literal
/// strings, integers, floats (inf / nan included), booleans, arrays (may span
/// lines) and inline tables. Errors carry the line number.
Json parse_toml(std::string_view text);
Json parse_toml_file(const std::string& path);

}  // namespace spadapt::tools
