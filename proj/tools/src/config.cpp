#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace ecosim::cli {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    const YAML::Mark m = node.Mark();
    std::ostringstream os;
    os << source_;
    if (!m.is_null()) os << ":" << m.line + 1 << ":" << m.column + 1;
    os << ": " << what;
    throw ConfigError(os.str());
  }

  void expect_map(const YAML::Node& node, const std::string& name,
                  const std::set<std::string>& keys) const {
    if (!node.IsMap()) fail(node, "'" + name + "' must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown key '" + key + "' in '" + name + "'");
    }
  }

  template <typename T>
  void get(const YAML::Node& map, const char* key, T& out) const {
    const YAML::Node node = map[key];
    if (!node) return;
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, std::string("bad value for '") + key + "'");
    }
  }

  template <typename T, std::size_t N>
  void get_array(const YAML::Node& map, const char* key, std::array<T, N>& out) const {
    const YAML::Node node = map[key];
    if (!node) return;
    if (!node.IsSequence() || node.size() != N) {
      fail(node, std::string("'") + key + "' must be a list of " + std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) {
      try {
        out[i] = node[i].as<T>();
      } catch (const YAML::Exception&) {
        fail(node[i], std::string("bad value in '") + key + "'");
      }
    }
  }

 private:
  std::string source_;
};

void read_scenario(const Reader& r, const YAML::Node& n, SimConfig& cfg) {
  r.expect_map(n, "scenario", {"preset", "lane_width", "vehicle_length", "vehicle_width",
                               "v_max", "dt", "t_final", "handoff_band", "s0", "h0", "h1", "s1",
                               "v0", "v_others", "noise"});
  if (n["preset"]) {
    std::string preset;
    r.get(n, "preset", preset);
    try {
      cfg.scenario = scenario_preset(preset);
    } catch (const ConfigError& e) {
      r.fail(n["preset"], e.what());
    }
  }
  ScenarioConfig& sc = cfg.scenario;
  r.get(n, "lane_width", sc.lane_width);
  r.get(n, "vehicle_length", sc.box.length);
  r.get(n, "vehicle_width", sc.box.width);
  r.get(n, "v_max", sc.v_max);
  r.get(n, "dt", sc.dt);
  r.get(n, "t_final", sc.t_final);
  r.get(n, "handoff_band", sc.handoff_band);
  r.get(n, "s0", sc.s0);
  r.get(n, "h0", sc.h0);
  r.get(n, "h1", sc.h1);
  r.get(n, "s1", sc.s1);
  r.get(n, "v0", sc.v0);
  r.get(n, "v_others", sc.v_others);
  r.get_array(n, "noise", sc.noise.variance);
}

void read_powertrain(const Reader& r, const YAML::Node& n, PowertrainParams& p) {
  r.expect_map(n, "powertrain",
               {"delay", "u_min", "u_max", "m1", "b1", "m2", "b2", "rho_c0", "rho_c2"});
  r.get(n, "delay", p.delay);
  r.get(n, "u_min", p.u_min);
  r.get(n, "u_max", p.u_max);
  r.get(n, "m1", p.m1);
  r.get(n, "b1", p.b1);
  r.get(n, "m2", p.m2);
  r.get(n, "b2", p.b2);
  r.get(n, "rho_c0", p.rho_c0);
  r.get(n, "rho_c2", p.rho_c2);
}

void read_mpc(const Reader& r, const YAML::Node& n, MpcParams& m) {
  r.expect_map(n, "mpc", {"horizon", "q_g", "q_a", "tau", "d", "tau_min", "d_min", "eta",
                          "margin_rate", "delta_s", "slack_penalty", "max_iter", "tolerance"});
  r.get(n, "horizon", m.horizon);
  r.get(n, "q_g", m.q_g);
  r.get(n, "q_a", m.q_a);
  r.get(n, "tau", m.tau);
  r.get(n, "d", m.d);
  r.get(n, "tau_min", m.tau_min);
  r.get(n, "d_min", m.d_min);
  r.get(n, "eta", m.eta);
  r.get(n, "margin_rate", m.margin_rate);
  r.get(n, "delta_s", m.delta_s);
  r.get(n, "slack_penalty", m.slack_penalty);
  r.get(n, "max_iter", m.solver.max_iter);
  if (n["tolerance"]) {
    r.get(n, "tolerance", m.solver.tol_prim);
    m.solver.tol_dual = m.solver.tol_prim;
  }
}

void read_ovm(const Reader& r, const YAML::Node& n, const std::string& name, OvmParams& o) {
  r.expect_map(n, name, {"alpha", "beta", "d", "tau"});
  r.get(n, "alpha", o.alpha);
  r.get(n, "beta", o.beta);
  r.get(n, "d", o.d);
  r.get(n, "tau", o.tau);
}

void read_game(const Reader& r, const YAML::Node& n, SimConfig& cfg) {
  r.expect_map(n, "game", {"weights", "discount", "horizon", "dt", "desired_time_headway",
                           "a_mild", "a_hard", "v_min", "period"});
  GameParams& g = cfg.game;
  r.get_array(n, "weights", g.weights);
  r.get(n, "discount", g.discount);
  r.get(n, "horizon", g.horizon);
  r.get(n, "dt", g.dt);
  r.get(n, "desired_time_headway", g.desired_time_headway);
  r.get(n, "a_mild", g.a_mild);
  r.get(n, "a_hard", g.a_hard);
  r.get(n, "v_min", g.v_min);
  r.get(n, "period", cfg.game_period);
}

void read_estimator(const Reader& r, const YAML::Node& n, EstimatorParams& e) {
  r.expect_map(n, "estimator", {"floor", "prior_leader", "min_log_likelihood"});
  r.get(n, "floor", e.floor);
  r.get(n, "prior_leader", e.prior_leader);
  r.get(n, "min_log_likelihood", e.min_log_likelihood);
}

void read_run(const Reader& r, const YAML::Node& n, RunSpec& spec) {
  r.expect_map(n, "run", {"controller", "roles", "reps", "seed", "delay_aware"});
  std::string text;
  if (n["controller"]) {
    r.get(n, "controller", text);
    try {
      spec.controllers = parse_controllers(text);
    } catch (const ConfigError& e) {
      r.fail(n["controller"], e.what());
    }
  }
  if (n["roles"]) {
    r.get(n, "roles", text);
    try {
      spec.roles = parse_roles(text);
    } catch (const ConfigError& e) {
      r.fail(n["roles"], e.what());
    }
  }
  r.get(n, "reps", spec.reps);
  r.get(n, "seed", spec.seed);
  r.get(n, "delay_aware", spec.base.delay_aware);
  if (spec.reps < 1) r.fail(n["reps"], "'reps' must be at least 1");
}

}  // namespace

std::vector<ControllerKind> parse_controllers(const std::string& text) {
  if (text == "all") {
    return {ControllerKind::Ovm, ControllerKind::EcoBaseline, ControllerKind::EcoCutinAware};
  }
  return {parse_controller(text)};
}

std::vector<Role> parse_roles(const std::string& text) {
  if (text == "both") return {Role::Leader, Role::Follower};
  return {parse_role(text)};
}

RunSpec parse_config(const std::string& text, const std::string& source) {
  RunSpec spec;
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (root.IsNull()) return spec;
  r.expect_map(root, "<root>",
               {"scenario", "powertrain", "mpc", "ovm", "cutin_ovm", "game", "estimator", "run"});
  SimConfig& cfg = spec.base;
  if (root["scenario"]) read_scenario(r, root["scenario"], cfg);
  if (root["powertrain"]) read_powertrain(r, root["powertrain"], cfg.powertrain);
  if (root["mpc"]) read_mpc(r, root["mpc"], cfg.mpc);
  if (root["ovm"]) read_ovm(r, root["ovm"], "ovm", cfg.ovm);
  if (root["cutin_ovm"]) read_ovm(r, root["cutin_ovm"], "cutin_ovm", cfg.cutin_ovm);
  if (root["game"]) read_game(r, root["game"], cfg);
  if (root["estimator"]) read_estimator(r, root["estimator"], cfg.estimator);
  if (root["run"]) read_run(r, root["run"], spec);
  return spec;
}

RunSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace ecosim::cli
