#include "runner.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace ecosim::cli {

std::string trace_file_name(const EpisodeRecord& r) {
  std::string name = std::string(to_string(r.controller)) + "_" + r.scenario;
  if (r.role) name += "_" + std::string(to_string(*r.role));
  name += "_seed" + std::to_string(r.seed) + "_rep" + std::to_string(r.repetition) + ".csv";
  return name;
}

std::vector<EpisodeRecord> run_batch(const RunSpec& spec, const BatchOptions& options) {
  struct Job {
    SimConfig config;
    EpisodeRecord record;
  };
  std::vector<Job> jobs;
  const bool has_cutin = spec.base.scenario.cutin_present;
  const std::vector<std::optional<Role>> roles = [&] {
    std::vector<std::optional<Role>> out;
    if (!has_cutin) return std::vector<std::optional<Role>>{std::nullopt};
    for (Role r : spec.roles) out.emplace_back(r);
    return out;
  }();
  for (ControllerKind kind : spec.controllers) {
    for (const auto& role : roles) {
      for (int rep = 0; rep < spec.reps; ++rep) {
        Job job;
        job.config = spec.base;
        job.config.controller = kind;
        job.config.role = role.value_or(Role::Leader);
        job.config.seed = spec.seed;
        job.config.repetition = rep;
        job.record = {kind, spec.base.scenario.name, role, spec.seed, rep, {}};
        jobs.push_back(std::move(job));
      }
    }
  }
  // Surface configuration errors before any thread starts.
  for (auto& job : jobs) {
    job.config.sync();
    job.config.validate();
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        const Episode ep = run_episode(jobs[i].config);
        jobs[i].record.summary = ep.summary;
        if (options.trace_dir) {
          write_atomic(*options.trace_dir / trace_file_name(jobs[i].record), trace_csv(ep.trace));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<EpisodeRecord> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(std::move(job.record));
  return out;
}

}  // namespace ecosim::cli
