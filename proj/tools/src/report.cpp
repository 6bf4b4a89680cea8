#include "report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ecosim::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string subset_text(const std::vector<Role>& subset) {
  std::string out;
  for (Role r : subset) {
    if (!out.empty()) out += '|';
    out += to_string(r);
  }
  return out;
}

double parse_double(const std::string& field) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("trace: bad number '" + field + "'");
  }
  return x;
}

}  // namespace

std::string trace_csv(const std::vector<StepTrace>& trace) {
  std::string out =
      "t,s0,v0,l0,a0_realized,a0_desired,h0,s1,v1,l1,p_leader,sigma_set,energy,feasible\n";
  for (const StepTrace& r : trace) {
    const VehicleState& ego = r.vehicles[kEgo];
    out += format_number(r.t) + ',' + format_number(ego.s) + ',' + format_number(ego.v) + ',' +
           format_number(ego.l) + ',' + format_number(r.accel[kEgo]) + ',' +
           format_number(r.desired_accel) + ',' + format_number(r.headway) + ',';
    if (r.present[kCutin]) {
      const VehicleState& c = r.vehicles[kCutin];
      out += format_number(c.s) + ',' + format_number(c.v) + ',' + format_number(c.l) + ',';
    } else {
      out += ",,,";
    }
    out += format_number(r.p_leader) + ',' + subset_text(r.subset) + ',' +
           format_number(r.energy) + ',' + (r.feasible ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace: empty file");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 14) throw std::runtime_error("trace: expected 14 columns");
    rows.push_back({parse_double(f[0]), parse_double(f[2]), parse_double(f[4]),
                    parse_double(f[12])});
  }
  return rows;
}

double trace_energy(const std::vector<TraceRow>& rows, const PowertrainParams& powertrain,
                    double dt) {
  EnergyAccumulator acc;
  for (const TraceRow& r : rows) acc.add(r.v0, r.a0_realized, powertrain, dt);
  return acc.w;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string group_key(const EpisodeRecord& record) {
  if (!record.role) return record.scenario;
  return record.scenario + ":" + std::string(to_string(*record.role));
}

std::vector<SummaryRow> summarize(const std::vector<EpisodeRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<const EpisodeRecord*>> groups;
  for (const auto& r : records) {
    groups[{std::string(to_string(r.controller)), group_key(r)}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [id, members] : groups) {
    SummaryRow row;
    row.controller = id.first;
    row.key = id.second;
    row.episodes = static_cast<int>(members.size());
    row.min_headway_margin = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto* m : members) {
      sum += m->summary.energy;
      row.collisions += m->summary.collision ? 1 : 0;
      row.failed += m->summary.failed ? 1 : 0;
      row.slack_activations += m->summary.slack_activations;
      row.min_headway_margin = std::min(row.min_headway_margin, m->summary.min_headway_margin);
      row.max_wall_time = std::max(row.max_wall_time, m->summary.wall_time);
    }
    row.mean = sum / row.episodes;
    if (row.episodes > 1) {
      double ss = 0.0;
      for (const auto* m : members) ss += (m->summary.energy - row.mean) * (m->summary.energy - row.mean);
      row.std = std::sqrt(ss / (row.episodes - 1));
    }
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json summary_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& r : rows) {
    nlohmann::json e;
    e["episodes"] = r.episodes;
    e["mean"] = r.mean;
    if (r.std) e["std"] = *r.std;
    e["collisions"] = r.collisions;
    e["failed"] = r.failed;
    e["min_headway_margin"] = r.min_headway_margin;
    e["slack_activations"] = r.slack_activations;
    out[r.key][r.controller] = e;
  }
  return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(11) << "controller" << std::setw(22) << "scenario"
     << std::right << std::setw(5) << "n" << std::setw(10) << "mean" << std::setw(9) << "std"
     << std::setw(6) << "coll" << std::setw(7) << "fail" << std::setw(12) << "min_margin"
     << '\n';
  os << std::fixed;
  for (const auto& r : rows) {
    os << std::left << std::setw(11) << r.controller << std::setw(22) << r.key << std::right
       << std::setw(5) << r.episodes << std::setw(10) << std::setprecision(2) << r.mean;
    if (r.std) {
      os << std::setw(9) << std::setprecision(2) << *r.std;
    } else {
      os << std::setw(9) << "-";
    }
    os << std::setw(6) << r.collisions << std::setw(7) << r.failed << std::setw(12)
       << std::setprecision(2) << r.min_headway_margin << '\n';
  }
  return os.str();
}

double percent_reduction(double baseline, double candidate) {
  return (baseline - candidate) / baseline * 100.0;
}

std::vector<Comparison> compare(const nlohmann::json& baseline, const nlohmann::json& candidate,
                                const std::string& baseline_controller,
                                const std::string& candidate_controller) {
  std::set<std::string> a;
  std::set<std::string> b;
  for (const auto& [key, entry] : baseline.items()) {
    if (entry.contains(baseline_controller)) a.insert(key);
  }
  for (const auto& [key, entry] : candidate.items()) {
    if (entry.contains(candidate_controller)) b.insert(key);
  }
  if (a.empty() && b.empty()) {
    throw std::runtime_error("compare: no entries for '" + baseline_controller + "' and '" +
                             candidate_controller + "'");
  }
  if (a != b) {
    std::string missing;
    for (const auto& k : a) {
      if (!b.count(k)) missing += " " + k + " (only in baseline)";
    }
    for (const auto& k : b) {
      if (!a.count(k)) missing += " " + k + " (only in candidate)";
    }
    throw std::runtime_error("compare: key mismatch:" + missing);
  }
  std::vector<Comparison> out;
  for (const auto& key : a) {
    Comparison c;
    c.key = key;
    c.baseline = baseline.at(key).at(baseline_controller).at("mean").get<double>();
    c.candidate = candidate.at(key).at(candidate_controller).at("mean").get<double>();
    c.reduction = percent_reduction(c.baseline, c.candidate);
    out.push_back(c);
  }
  return out;
}

}  // namespace ecosim::cli
