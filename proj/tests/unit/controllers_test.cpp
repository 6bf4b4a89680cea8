#include <gtest/gtest.h>

#include "ecosim/controllers.hpp"
#include "ecosim/sim.hpp"

using namespace ecosim;

TEST(Ovm, Examples) {
  const OvmParams p;
  const VehicleState ego{0.0, 20.0, 0.0};
  EXPECT_NEAR(ovm_accel(ego, VehicleState{100.0, 16.0, 0.0}, p), 2.0, 1e-12);
  EXPECT_NEAR(ovm_accel(ego, VehicleState{6.0, 0.0, 0.0}, p), -18.0, 1e-12);
  EXPECT_NEAR(ovm_accel({0.0, 12.0, 0.0}, std::nullopt, p), 0.4 * 18.0 + 0.5 * 18.0, 1e-12);
}

TEST(Ovm, EquilibriumFamily) {
  const OvmParams p;
  for (double v = 0.0; v <= p.v_max; v += 0.25) {
    const VehicleState ego{0.0, v, 0.0};
    const VehicleState lead{p.vehicle_length + p.d + p.tau * v, v, 0.0};
    EXPECT_NEAR(ovm_accel(ego, lead, p), 0.0, 1e-12) << v;
  }
}

TEST(Controllers, Names) {
  EXPECT_EQ(parse_controller("ovm"), ControllerKind::Ovm);
  EXPECT_EQ(parse_controller("eco"), ControllerKind::EcoBaseline);
  EXPECT_EQ(parse_controller("eco-cutin"), ControllerKind::EcoCutinAware);
  EXPECT_EQ(to_string(ControllerKind::EcoCutinAware), "eco-cutin");
  EXPECT_THROW(parse_controller("idm"), ConfigError);
}

TEST(Controllers, HistoryKeepsLastCommands) {
  CommandHistory h(3, 0.5);
  EXPECT_EQ(h.values(), (std::vector<double>{0.5, 0.5, 0.5}));
  h.push(1.0);
  h.push(2.0);
  EXPECT_EQ(h.values(), (std::vector<double>{0.5, 1.0, 2.0}));
  CommandHistory none(0);
  none.push(3.0);
  EXPECT_TRUE(none.values().empty());
}

TEST(Controllers, CutinAwareEqualsBaselineWithoutCutin) {
  SimConfig cfg;
  cfg.scenario = scenario_preset("no_cutin");
  cfg.controller = ControllerKind::EcoBaseline;
  const auto a = run_episode(cfg);
  cfg.controller = ControllerKind::EcoCutinAware;
  const auto b = run_episode(cfg);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].desired_accel, b.trace[k].desired_accel) << k;
  }
  EXPECT_EQ(a.summary.energy, b.summary.energy);
}

TEST(Controllers, OvmReactsToStoppedTraffic) {
  ControllerConfig cc;
  cc.kind = ControllerKind::Ovm;
  auto c = make_controller(cc);
  TrafficState t;
  t[kEgo] = {0.0, 20.0, 0.0};
  t[kSameLaneLead] = {6.0, 0.0, 0.0};
  t.present = {true, false, true, false};
  const auto d = c->step(t);
  EXPECT_NEAR(d.desired_accel, -18.0, 1e-12);
  EXPECT_EQ(d.preceding, kSameLaneLead);
}

TEST(Controllers, CutinAwareReactsBeforeCrossing) {
  SimConfig cfg;
  cfg.scenario = scenario_preset("front_cutin");
  cfg.sync();
  auto aware = make_controller([&] {
    auto cc = cfg.controller_config();
    cc.kind = ControllerKind::EcoCutinAware;
    return cc;
  }());
  auto base = make_controller([&] {
    auto cc = cfg.controller_config();
    cc.kind = ControllerKind::EcoBaseline;
    return cc;
  }());
  const TrafficState t = build_scenario(cfg.scenario);
  const auto da = aware->step(t);
  const auto db = base->step(t);
  EXPECT_TRUE(da.cutin_tracked);
  EXPECT_FALSE(da.subset.empty());
  EXPECT_LT(da.desired_accel, db.desired_accel);
}

TEST(Controllers, InvalidSubParametersRejected) {
  ControllerConfig cc;
  cc.ovm.alpha = 0.0;
  EXPECT_THROW(make_controller(cc), ConfigError);
}
