#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace farlab::harness {

/// Reads the TOML subset used by experiment configs into JSON: [tables],
/// dotted keys, strings, integers, floats, booleans and single-line arrays
/// of those. Throws ConfigError with a line number on anything else.
nlohmann::json parse_toml(const std::string& text);

}  // namespace farlab::harness
