#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecosim/sim.hpp"

namespace ecosim::cli {

/// Everything a batch run needs. Built from the YAML file, then overridden by flags.
struct RunSpec {
  SimConfig base{};
  std::vector<ControllerKind> controllers{ControllerKind::EcoCutinAware};
  std::vector<Role> roles{Role::Leader};
  int reps = 1;
  std::uint64_t seed = 0;
};

/// Reads a YAML config. Unknown keys and type errors throw ConfigError with
/// the file name and line.
RunSpec load_config(const std::filesystem::path& path);
RunSpec parse_config(const std::string& text, const std::string& source = "<string>");

/// "ovm", "eco", "eco-cutin" or "all".
std::vector<ControllerKind> parse_controllers(const std::string& text);
/// "leader", "follower" or "both".
std::vector<Role> parse_roles(const std::string& text);

}  // namespace ecosim::cli
