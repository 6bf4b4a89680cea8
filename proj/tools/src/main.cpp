#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "report.hpp"
#include "runner.hpp"

namespace {

namespace cli = ecosim::cli;

int default_jobs() {
  if (const char* env = std::getenv("ECOSIM_JOBS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring ECOSIM_JOBS='" << env << "'\n";
    }
  }
  return 1;
}

struct RunFlags {
  std::string config;
  std::optional<std::string> scenario;
  std::optional<std::string> controller;
  std::optional<std::string> roles;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<double> s1;
  std::optional<double> delay;
  bool ignore_delay = false;
  std::string out = "out";
  bool emit_traces = false;
  int jobs = default_jobs();
};

int run_command(const RunFlags& f) {
  cli::RunSpec spec;
  try {
    if (!f.config.empty()) spec = cli::load_config(f.config);
    if (f.scenario) {
      const auto keep = spec.base.scenario;
      spec.base.scenario = ecosim::scenario_preset(*f.scenario);
      spec.base.scenario.noise = keep.noise;
      spec.base.scenario.dt = keep.dt;
      spec.base.scenario.t_final = keep.t_final;
    }
    if (f.controller) spec.controllers = cli::parse_controllers(*f.controller);
    if (f.roles) spec.roles = cli::parse_roles(*f.roles);
    if (f.reps) spec.reps = *f.reps;
    if (f.seed) spec.seed = *f.seed;
    if (f.s1) spec.base.scenario.s1 = *f.s1;
    if (f.delay) spec.base.powertrain.delay = *f.delay;
    if (f.ignore_delay) spec.base.delay_aware = false;
    if (spec.reps < 1) throw ecosim::ConfigError("--reps must be at least 1");
  } catch (const ecosim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  cli::BatchOptions options;
  options.jobs = f.jobs;
  const std::filesystem::path out = f.out;
  if (f.emit_traces) options.trace_dir = out / "traces";

  std::vector<cli::EpisodeRecord> records;
  try {
    records = cli::run_batch(spec, options);
  } catch (const ecosim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const auto rows = cli::summarize(records);
  cli::write_atomic(out / "summary.json", cli::summary_json(rows).dump(2) + "\n");
  std::cout << cli::summary_table(rows);
  int failed = 0;
  for (const auto& r : records) {
    if (r.summary.failed) {
      ++failed;
      std::cerr << "episode failed: " << cli::trace_file_name(r) << ": " << r.summary.error << '\n';
    }
  }
  return failed > 0 ? 2 : 0;
}

struct CompareFlags {
  std::vector<std::string> files;
  std::string baseline = "eco";
  std::string candidate = "eco-cutin";
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return nlohmann::json::parse(in);
}

int compare_command(const CompareFlags& f) {
  try {
    const nlohmann::json base = read_json(f.files.front());
    std::cout << std::fixed;
    for (std::size_t i = 1; i < f.files.size(); ++i) {
      const nlohmann::json cand = read_json(f.files[i]);
      for (const auto& c : cli::compare(base, cand, f.baseline, f.candidate)) {
        std::cout << std::left << std::setw(24) << c.key << std::right << std::setw(10)
                  << std::setprecision(2) << c.baseline << std::setw(10) << c.candidate
                  << std::setw(9) << std::setprecision(1) << c.reduction << "%\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop eco-driving simulations with an interactive cut-in vehicle"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "run episodes and write a summary");
  run->add_option("--config", rf.config, "YAML config file")->check(CLI::ExistingFile);
  run->add_option("--scenario", rf.scenario, "no_cutin, behind_cutin or front_cutin");
  run->add_option("--controller", rf.controller, "ovm, eco, eco-cutin or all");
  run->add_option("--roles", rf.roles, "leader, follower or both");
  run->add_option("--reps", rf.reps, "repetitions per controller and role");
  run->add_option("--seed", rf.seed, "base seed");
  run->add_option("--s1", rf.s1, "initial position of the cut-in vehicle [m]");
  run->add_option("--delay", rf.delay, "powertrain delay [s]");
  run->add_flag("--ignore-delay", rf.ignore_delay, "plan as if there were no delay");
  run->add_option("--out", rf.out, "output directory")->capture_default_str();
  run->add_flag("--emit-traces", rf.emit_traces, "write one CSV trace per episode");
  run->add_option("--jobs", rf.jobs, "parallel episodes (default: $ECOSIM_JOBS or 1)")
      ->check(CLI::PositiveNumber);

  CompareFlags cf;
  auto* cmp = app.add_subcommand("compare", "percent energy reduction between summaries");
  cmp->add_option("files", cf.files, "baseline summary followed by candidate summaries")
      ->required()
      ->expected(2, -1)
      ->check(CLI::ExistingFile);
  cmp->add_option("--baseline", cf.baseline, "controller taken from the baseline file")
      ->capture_default_str();
  cmp->add_option("--candidate", cf.candidate, "controller taken from the candidate files")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (run->parsed()) return run_command(rf);
  return compare_command(cf);
}
