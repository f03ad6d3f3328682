#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace farlab::harness {

/// Invalid configuration or input document (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File system failure (CLI exit code 3).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Run directory lacks expected files (CLI exit code 4).
struct MissingFilesError : std::runtime_error {
  explicit MissingFilesError(std::vector<std::string> missing_files)
      : std::runtime_error("missing files: " + join(missing_files)), missing(std::move(missing_files)) {}
  std::vector<std::string> missing;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& f : v) s += (s.empty() ? "" : ", ") + f;
    return s;
  }
};

/// State document written by a different format version.
struct VersionMismatchError : ConfigError {
  VersionMismatchError(int expected, int found)
      : ConfigError("state version mismatch: expected " + std::to_string(expected) + ", found " +
                    std::to_string(found)),
        expected_version(expected),
        found_version(found) {}
  int expected_version;
  int found_version;
};

}  // namespace farlab::harness
