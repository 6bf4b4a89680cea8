#include <random>

#include <benchmark/benchmark.h>

#include "ecosim/game.hpp"
#include "ecosim/mpc.hpp"
#include "ecosim/qp.hpp"
#include "ecosim/sim.hpp"

using namespace ecosim;

namespace {

qp::QpProblem random_box_qp(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = g(rng);
  }
  qp::QpProblem p;
  p.P = M * M.transpose() + Eigen::MatrixXd::Identity(n, n);
  p.q = Eigen::VectorXd::NullaryExpr(n, [&] { return 5.0 * g(rng); });
  p.A = Eigen::MatrixXd::Identity(n, n);
  p.lb = Eigen::VectorXd::Constant(n, -1.0);
  p.ub = Eigen::VectorXd::Constant(n, 1.0);
  return p;
}

void BM_BoxQp(benchmark::State& state) {
  const auto p = random_box_qp(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qp::solve(p));
}
BENCHMARK(BM_BoxQp)->Arg(10)->Arg(30)->Arg(50);

void BM_MpcPlan(benchmark::State& state) {
  const MpcParams p;
  const VehicleState ego{0.0, 20.0, 0.0};
  PrecedingForecast f;
  f.probability = 1.0;
  for (int k = 0; k <= p.horizon; ++k) f.positions.push_back(60.0 + 16.0 * k * p.dt);
  const std::vector<double> fixed(6, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan(ego, fixed, std::span<const PrecedingForecast>(&f, 1), p));
  }
}
BENCHMARK(BM_MpcPlan)->Unit(benchmark::kMillisecond);

void BM_GamePolicy(benchmark::State& state) {
  const TrafficState t = build_scenario(scenario_preset("front_cutin"));
  const CutinGame game{GameParams{}};
  const Role role = state.range(0) ? Role::Follower : Role::Leader;
  for (auto _ : state) benchmark::DoNotOptimize(game.policy(t, role));
}
BENCHMARK(BM_GamePolicy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Episode(benchmark::State& state) {
  SimConfig c;
  c.scenario = scenario_preset("front_cutin");
  c.controller = static_cast<ControllerKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(c));
}
BENCHMARK(BM_Episode)->DenseRange(0, 2)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
