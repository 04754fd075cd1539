#include <benchmark/benchmark.h>

#include <random>

#include "uavmec/config.hpp"
#include "uavmec/drl.hpp"
#include "uavmec/offload_lp.hpp"
#include "uavmec/orchestrator.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/solver.hpp"
#include "uavmec/trajectory.hpp"

using namespace uavmec;

namespace {

LinearProgram random_lp(int n, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  LinearProgram lp;
  lp.c = Eigen::VectorXd::NullaryExpr(n, [&] { return U(rng); });
  lp.A_ineq = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return U(rng); });
  const Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.5 * U(rng); });
  lp.b_ineq = lp.A_ineq * x0 + Eigen::VectorXd::Constant(m, 0.5);
  lp.lower = Eigen::VectorXd::Constant(n, -1.0);
  lp.upper = Eigen::VectorXd::Constant(n, 1.0);
  return lp;
}

void BM_SolveLp(benchmark::State& st) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(st.range(0));
  const LinearProgram lp = random_lp(n, n / 2, rng);
  for (auto _ : st) benchmark::DoNotOptimize(solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Arg(10)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_OffloadLp(benchmark::State& st) {
  SimConfig cfg;
  cfg.scenario.num_vehicles = static_cast<int>(st.range(0));
  cfg.tasks.total_load_mb = 0.6 * cfg.scenario.num_vehicles;
  cfg.run.mode = RunMode::eval;
  cfg.run.slots = 1;
  cfg.finalize();
  Simulation sim(cfg);
  sim.reset(3);
  const std::vector<OffloadVehicle> vs = sim.run_slot().trace.lp1_vehicles;
  const OffloadParams p = OffloadParams::from(cfg.tasks, cfg.scenario.num_uavs, cfg.scenario.slot_duration_s, cfg.energy);
  for (auto _ : st) benchmark::DoNotOptimize(solve_offload(build_offload_lp(vs, p)));
}
BENCHMARK(BM_OffloadLp)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_PlanTrajectories(benchmark::State& st) {
  ScenarioConfig scn;
  scn.num_uavs = static_cast<int>(st.range(0));
  const TrajectoryConfig cfg;
  Scenario s = init_scenario(scn);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> load(0.0, 2e6);
  for (auto& v : s.vehicles) v.task_bits = load(rng);
  int slot = 0;
  for (auto _ : st) benchmark::DoNotOptimize(plan_all_trajectories(s.uavs, s.vehicles, scn, cfg, slot++));
}
BENCHMARK(BM_PlanTrajectories)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_MlpForwardBackward(benchmark::State& st) {
  const int width = static_cast<int>(st.range(0));
  const Mlp m = Mlp::stack(200, {width, width}, 100, true, Activation::sigmoid);
  Eigen::VectorXd theta(m.num_params());
  Rng rng(4);
  m.initialise(theta.data(), rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(200, 128);
  const Eigen::MatrixXd dy = Eigen::MatrixXd::Random(100, 128);
  Eigen::VectorXd grad(theta.size());
  for (auto _ : st) {
    Mlp::Tape tape;
    m.forward(theta.data(), x, &tape);
    grad.setZero();
    benchmark::DoNotOptimize(m.backward(theta.data(), tape, dy, grad.data()));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DdpgUpdate(benchmark::State& st) {
  AgentConfig ac;
  ac.num_vehicles = 50;
  DdpgAgent agent(ac);
  Rng rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < ac.batch_size * 2; ++i) {
    Transition t;
    t.state = Eigen::VectorXd::NullaryExpr(ac.state_dim(), [&] { return U(rng); });
    t.action = Eigen::VectorXd::NullaryExpr(ac.action_dim(), [&] { return U(rng); });
    t.reward = -U(rng);
    t.next_state = Eigen::VectorXd::NullaryExpr(ac.state_dim(), [&] { return U(rng); });
    agent.buffer().push(std::move(t));
  }
  for (auto _ : st) benchmark::DoNotOptimize(agent.train_step());
}
BENCHMARK(BM_DdpgUpdate)->Unit(benchmark::kMillisecond);

void BM_SimulationSlot(benchmark::State& st) {
  SimConfig cfg;
  cfg.run.mode = RunMode::eval;
  cfg.scheduler.mode = SchedulerMode::rule;
  cfg.run.slots = 1 << 30;
  cfg.finalize();
  Simulation sim(cfg);
  sim.reset(6);
  for (auto _ : st) benchmark::DoNotOptimize(sim.run_slot());
}
BENCHMARK(BM_SimulationSlot)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
