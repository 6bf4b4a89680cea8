#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecosim/sim.hpp"

namespace ecosim::cli {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double x);

/// CSV with one row per simulation step.
std::string trace_csv(const std::vector<StepTrace>& trace);

struct TraceRow {
  double t = 0.0;
  double v0 = 0.0;
  double a0_realized = 0.0;
  double energy = 0.0;
};

std::vector<TraceRow> parse_trace_csv(const std::string& text);

/// Energy of a parsed trace, recomputed with the left-endpoint rule.
double trace_energy(const std::vector<TraceRow>& rows, const PowertrainParams& powertrain,
                    double dt);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct EpisodeRecord {
  ControllerKind controller = ControllerKind::EcoCutinAware;
  std::string scenario;
  std::optional<Role> role;  // absent without a cut-in vehicle
  std::uint64_t seed = 0;
  int repetition = 0;
  RunSummary summary;
};

/// "<scenario>:<role>" or just the scenario name without a cut-in vehicle.
std::string group_key(const EpisodeRecord& record);

struct SummaryRow {
  std::string controller;
  std::string key;
  int episodes = 0;
  double mean = 0.0;
  std::optional<double> std;  // sample deviation, only with more than one episode
  int collisions = 0;
  int failed = 0;
  double min_headway_margin = 0.0;
  int slack_activations = 0;
  double max_wall_time = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<EpisodeRecord>& records);

/// {"<key>": {"<controller>": {...}}}; nlohmann's object keeps keys sorted.
nlohmann::json summary_json(const std::vector<SummaryRow>& rows);

std::string summary_table(const std::vector<SummaryRow>& rows);

double percent_reduction(double baseline, double candidate);

struct Comparison {
  std::string key;
  double baseline = 0.0;
  double candidate = 0.0;
  double reduction = 0.0;  // [%]
};

/// Matches `baseline_controller` entries of `baseline` against
/// `candidate_controller` entries of `candidate` key by key. Throws
/// std::runtime_error when the key sets differ.
std::vector<Comparison> compare(const nlohmann::json& baseline, const nlohmann::json& candidate,
                                const std::string& baseline_controller,
                                const std::string& candidate_controller);

}  // namespace ecosim::cli
