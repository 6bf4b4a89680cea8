#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace ecosim::cli {

struct BatchOptions {
  int jobs = 1;
  std::optional<std::filesystem::path> trace_dir;  // one CSV per episode when set
};

/// Expands the spec into episodes (controller x role x repetition) and runs
/// them on `jobs` threads. Output order does not depend on scheduling.
std::vector<EpisodeRecord> run_batch(const RunSpec& spec, const BatchOptions& options);

std::string trace_file_name(const EpisodeRecord& record);

}  // namespace ecosim::cli
