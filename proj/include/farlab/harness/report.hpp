#pragma once

#include <filesystem>
#include <string>

#include "farlab/harness/csv.hpp"

namespace farlab::harness {

struct Report {
  CsvTable summary;  // columns: section, name, value
  std::string markdown;
};

/// Summarizes a run directory: final returns, start-observation trend slope,
/// fragment counts and the structural event timeline. Throws
/// MissingFilesError listing every absent file.
Report build_report(const std::filesystem::path& run_dir);

/// build_report plus report.csv and report.md written into run_dir.
Report write_report(const std::filesystem::path& run_dir);

}  // namespace farlab::harness
