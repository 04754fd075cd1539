// One line per criterion: "[PASS] NN name: detail" or "[FAIL] ...".
// Usage: uavmec_acceptance [--only N[,N...]] [--list]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "offload_instances.hpp"
#include "offload_oracle.hpp"
#include "oracles.hpp"
#include "trajectory_oracle.hpp"
#include "uavmec/channel.hpp"
#include "uavmec/config.hpp"
#include "uavmec/drl.hpp"
#include "uavmec/macro_scheduler.hpp"
#include "uavmec/offload_lp.hpp"
#include "uavmec/orchestrator.hpp"
#include "uavmec/tasks.hpp"
#include "uavmec/trajectory.hpp"

using namespace uavmec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

SimConfig preset_config(std::initializer_list<const char*> names) {
  SimConfig c;
  for (const char* n : names) apply_preset(c, n);
  c.finalize();
  return c;
}

std::vector<SlotResult> run_slots(const SimConfig& cfg, std::uint64_t seed, int slots,
                                  std::shared_ptr<DdpgAgent> agent = nullptr) {
  Simulation sim(cfg, std::move(agent));
  std::vector<SlotResult> out;
  SimConfig c = cfg;
  sim.reset(seed);
  for (int t = 0; t < slots; ++t) out.push_back(sim.run_slot());
  sim.finish_episode();
  return out;
}

// ---------------------------------------------------------------------------

Outcome c01_channel() {
  const ChannelConfig ch;
  const double pl = v2i_pathloss_db(1000.0);
  const double los = los_probability_deg(9.61, ch);
  const int rbs = ch.total_rbs();
  const bool ok = std::abs(pl - 128.1) <= 1e-9 && std::abs(los - 1.0 / 10.61) <= 1e-9 && rbs == 55;
  return {ok, fmt("PL(1 km)=%.12f dB, P_LoS(9.61 deg)=%.12f (1/10.61=%.12f), RBs=%d", pl, los, 1.0 / 10.61, rbs)};
}

Outcome c02_solver() {
  gen::Rng rng(2024);
  double lp_gap = 0.0;
  int lp_fail = 0;
  for (int k = 0; k < 50; ++k) {
    const LinearProgram lp = gen::random_lp(rng, 5, 5, k % 3 == 0);
    const double ref = oracle::lp_vertex_enumeration(lp);
    const SolveResult r = solve_lp(lp);
    if (!r.optimal()) {
      ++lp_fail;
      continue;
    }
    lp_gap = std::max(lp_gap, std::abs(r.objective - ref));
  }
  double socp_gap = 0.0, socp_below = 0.0;
  int socp_fail = 0;
  for (int k = 0; k < 20; ++k) {
    const ConeProgram cp = gen::random_socp2(rng, k % 2 == 1);
    const SolveResult r = solve_socp(cp);
    if (!r.optimal() || !check_solution(cp, r.x).feasible(1e-7)) {
      ++socp_fail;
      continue;
    }
    const double grid = oracle::grid_min_2d(cp, -1.0, 1.0, 1e-3);
    socp_gap = std::max(socp_gap, grid - r.objective);
    socp_below = std::max(socp_below, r.objective - grid);
  }
  const bool ok = lp_fail == 0 && socp_fail == 0 && lp_gap <= 1e-6 && socp_gap <= 1e-3 && socp_below <= 1e-9;
  return {ok, fmt("LP max |gap|=%.2e over 50 (fail %d); SOCP max grid-ipm=%.2e, ipm-grid=%.2e over 20 (fail %d)",
                  lp_gap, lp_fail, socp_gap, socp_below, socp_fail)};
}

// Feasibility recomputed from the fractions alone.
double independent_violation(const OffloadPlan& plan, const std::vector<OffloadVehicle>& vs, const OffloadParams& p) {
  double worst = 0.0, bs = 0.0;
  std::vector<double> uav(p.uav_hz.size(), 0.0);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const OffloadRow& r = plan.rows[i];
    worst = std::max(worst, std::abs(r.gamma_local + r.gamma_bs + r.gamma_uav - 1.0));
    for (double g : {r.gamma_local, r.gamma_bs, r.gamma_uav}) worst = std::max({worst, -g, g - 1.0});
    const bool has_bs = vs[i].task_bits > 0 && vs[i].rate_v2i_bps > 0;
    const bool has_uav = vs[i].task_bits > 0 && vs[i].serving_uav && vs[i].rate_v2u_bps > 0;
    if (!has_bs) worst = std::max(worst, r.gamma_bs);
    if (!has_uav) worst = std::max(worst, r.gamma_uav);
    bs += r.gamma_bs * vs[i].task_bits;
    if (vs[i].serving_uav) uav[static_cast<std::size_t>(*vs[i].serving_uav)] += r.gamma_uav * vs[i].task_bits;
  }
  worst = std::max(worst, (bs - p.bs_hz * p.slot_duration_s / p.cycles_per_bit) / 1e6);
  for (std::size_t u = 0; u < uav.size(); ++u)
    worst = std::max(worst, (uav[u] - p.uav_hz[u] * p.slot_duration_s / p.cycles_per_bit) / 1e6);
  return worst;
}

Outcome c03_offload_bruteforce() {
  std::mt19937_64 rng(303);
  double worst_gap = -kInf, worst_violation = 0.0;
  int failures = 0, three = 0;
  for (int t = 0; t < 50; ++t) {
    OffloadParams p;
    std::vector<OffloadVehicle> vs = gen::random_offload(rng, 3, p);
    if (t % 5 == 0)  // saturate the caps on some instances
      for (auto& v : vs) v.task_bits = 8e6;
    three += vs.size() == 3;
    const OffloadPlan plan = solve_offload(build_offload_lp(vs, p));
    if (!plan.ok()) {
      ++failures;
      continue;
    }
    const double lp = oracle::plan_cost(vs, oracle::splits_of(plan), p);
    const double grid = oracle::offload_grid_min(vs, p, vs.size() == 3 ? 0.05 : 0.02);
    worst_gap = std::max(worst_gap, lp - grid);
    worst_violation = std::max(worst_violation, independent_violation(plan, vs, p));
  }
  const bool ok = failures == 0 && worst_gap <= 1e-6 && worst_violation <= 1e-9;
  return {ok, fmt("max(LP - grid)=%.3e, worst re-checked violation=%.2e, %d instances with M=3, %d solver failures",
                  worst_gap, worst_violation, three, failures)};
}

Outcome c04_trajectory_safety() {
  ScenarioConfig scn;
  TrajectoryConfig cfg;
  int plans = 0, violations = 0, motion = 0;
  double closest = kInf;
  for (std::uint64_t seed = 1; plans < 10000; ++seed) {
    scn.seed = seed;
    Scenario s = init_scenario(scn);
    Rng rng(seed * 7919);
    std::uniform_real_distribution<double> load(0.0, 2e6);
    for (int slot = 0; slot < 100 && plans < 10000; ++slot, ++plans) {
      for (auto& v : s.vehicles) v.task_bits = load(rng);
      const PlanResult plan = plan_all_trajectories(s.uavs, s.vehicles, scn, cfg, slot);
      for (std::size_t a = 0; a < plan.uavs.size(); ++a) {
        if (validate_uav_motion(s.uavs[a].position, plan.uavs[a].position, scn)) ++motion;
        for (std::size_t b = a + 1; b < plan.uavs.size(); ++b) {
          const double d = horizontal_distance(plan.uavs[a].position.horizontal(), plan.uavs[b].position.horizontal());
          closest = std::min(closest, d);
          if (d < scn.d_min_m - 1e-6) ++violations;
        }
      }
      s.uavs = plan.uavs;
      s.vehicles = step_vehicles(s.roads, s.vehicles, scn.slot_duration_s, rng);
    }
  }
  return {violations == 0 && motion == 0,
          fmt("%d plans x 5 UAVs: %d separation violations (closest %.6f m, d_min %.1f m), %d motion violations", plans,
              violations, closest, scn.d_min_m, motion)};
}

Outcome c05_trajectory_quality() {
  ScenarioConfig scn;
  TrajectoryConfig cfg;
  Rng rng(505);
  std::uniform_real_distribution<double> P(40.0, 260.0), off(-70.0, 70.0), L(0.1, 2.0), Z(50.0, 100.0),
      ang(0.0, 2.0 * kPi);
  std::uniform_int_distribution<int> nveh(0, 5);
  std::bernoulli_distribution peer(0.5);
  double worst = 0.0;
  int failures = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    UavState u;
    u.position = u.prev_position = {P(rng), P(rng), Z(rng)};
    std::vector<LocalVehicle> vs;
    const int n = nveh(rng);
    for (int j = 0; j < n; ++j) vs.push_back({j, {u.position.x + off(rng), u.position.y + off(rng)}, L(rng)});
    std::vector<HalfPlane> hp;
    if (peer(rng)) {
      const double a = ang(rng);
      hp.push_back(tangent_halfplane(u.position.horizontal(),
                                     {u.position.x + 28.0 * std::cos(a), u.position.y + 28.0 * std::sin(a)},
                                     scn.d_min_m));
    }
    const TrajectorySubproblem sp = build_uav_subproblem(u, vs, hp, scn, cfg);
    const SolveResult r = solve_socp(sp.program);
    if (!r.optimal()) {
      ++failures;
      continue;
    }
    const oracle::GridPoint g = oracle::trajectory_grid_min(sp, scn, cfg, 0.5);
    worst = std::max(worst, std::abs(r.objective - g.objective) / std::max(std::abs(g.objective), 1.0));
  }
  return {failures == 0 && worst <= 1e-3,
          fmt("%d instances (<=5 vehicles): max relative gap to 0.5 m grid (refined) %.3e, %d solver failures", trials,
              worst, failures)};
}

Outcome c06_coverage_trend() {
  SimConfig var = preset_config({});
  var.run.mode = RunMode::eval;
  var.scheduler.mode = SchedulerMode::off;
  SimConfig fixed = var;
  apply_preset(fixed, "fixed-altitude");
  fixed.finalize();
  double sum_var = 0.0, sum_fixed = 0.0;
  std::string per;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    double a = 0.0, b = 0.0;
    for (const SlotResult& s : run_slots(var, seed, 100)) a += s.metrics.coverage_rt / 100.0;
    for (const SlotResult& s : run_slots(fixed, seed, 100)) b += s.metrics.coverage_rt / 100.0;
    sum_var += a / 5.0;
    sum_fixed += b / 5.0;
    per += fmt(" %.2f/%.2f", a, b);
  }
  return {sum_var > sum_fixed,
          fmt("mean R_t variable %.4f vs fixed-50m %.4f over 5 seeds x 100 slots (per seed:%s)", sum_var, sum_fixed,
              per.c_str())};
}

Outcome c07_capacity() {
  SimConfig delay = preset_config({"load-50", "delay-focused"});
  delay.run.mode = RunMode::eval;
  SimConfig energy = preset_config({"load-50", "energy-focused"});
  energy.run.mode = RunMode::eval;
  const int slots = 30;
  const auto rd = run_slots(delay, 1, slots);
  const auto re = run_slots(energy, 1, slots);
  const double bs_cap = 9.0, uav_cap = 5.0;
  double bs_dev = 0.0, uav_max = 0.0;
  std::vector<double> tot_d(6, 0.0), tot_e(6, 0.0);
  for (int t = 0; t < slots; ++t) {
    const SlotMetrics& d = rd[static_cast<std::size_t>(t)].metrics;
    const SlotMetrics& e = re[static_cast<std::size_t>(t)].metrics;
    bs_dev = std::max(bs_dev, std::abs(d.bs_admitted_mb - bs_cap) / bs_cap);
    tot_d[0] += d.bs_admitted_mb;
    tot_e[0] += e.bs_admitted_mb;
    for (std::size_t u = 0; u < d.uav_admitted_mb.size(); ++u) {
      uav_max = std::max(uav_max, d.uav_admitted_mb[u]);
      tot_d[u + 1] += d.uav_admitted_mb[u];
      tot_e[u + 1] += e.uav_admitted_mb[u];
    }
  }
  double node_diff = 0.0;
  for (std::size_t k = 0; k < tot_d.size(); ++k)
    node_diff = std::max(node_diff, std::abs(tot_d[k] - tot_e[k]) / std::max(tot_d[k], 1e-12));
  const bool ok = bs_dev <= 0.01 && uav_max <= uav_cap * (1 + 1e-9) && node_diff <= 0.01;
  return {ok, fmt("%d slots at 50 Mb: max |BS - 9 Mb|/9 = %.4f%%, max UAV load %.6f Mb; delay- vs energy-focused "
                  "per-node totals differ by at most %.4f%%",
                  slots, 100 * bs_dev, uav_max, 100 * node_diff)};
}

Outcome c08_makespan() {
  SimConfig cfg = preset_config({"load-30", "delay-focused"});
  cfg.run.mode = RunMode::eval;
  int multi = 0, balanced = 0;
  for (const SlotResult& s : run_slots(cfg, 1, 30)) {
    const auto& rows = s.trace.final_plan.rows;
    for (const OffloadRow& r : rows) {
      std::vector<double> times;
      if (r.gamma_local > 1e-9) times.push_back(r.local_s);
      if (r.gamma_bs > 1e-9) times.push_back(r.bs_s);
      if (r.gamma_uav > 1e-9) times.push_back(r.uav_s);
      if (times.size() < 2) continue;
      ++multi;
      const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
      if (*hi - *lo <= 0.05 * r.completion_s) ++balanced;
    }
  }
  const double frac = multi ? static_cast<double>(balanced) / multi : 0.0;
  return {multi > 0 && frac >= 0.8,
          fmt("%d of %d multi-branch vehicles (%.2f%%) within 5%% of T_m over 30 slots at 30 Mb", balanced, multi,
              100 * frac)};
}

Eigen::VectorXd central_diff(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                             double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

Outcome c09_ddpg() {
  Rng rng(909);
  std::uniform_real_distribution<double> U(-1.0, 1.0), U01(0.0, 1.0);
  std::uniform_int_distribution<int> width(2, 7), depth(1, 3), dim(1, 4);
  auto rand_mat = [&](Eigen::Index r, Eigen::Index c) {
    return Eigen::MatrixXd(Eigen::MatrixXd::NullaryExpr(r, c, [&] { return U(rng); }));
  };
  double worst = 0.0;
  int checks = 0;
  for (int net = 0; net < 20; ++net) {
    std::vector<int> hidden;
    for (int d = depth(rng); d > 0; --d) hidden.push_back(width(rng));
    const int in = dim(rng) + 1, out = dim(rng);
    const bool ln = net % 2 == 0;
    if (net < 10) {
      const Mlp m = Mlp::stack(in, hidden, out, ln, net % 4 < 2 ? Activation::sigmoid : Activation::identity);
      Eigen::VectorXd theta(m.num_params());
      m.initialise(theta.data(), rng, 0.5);
      for (int point = 0; point < 5; ++point) {
        const Eigen::MatrixXd x = rand_mat(in, 3), w = rand_mat(out, 3);
        auto loss = [&](const Eigen::VectorXd& th) { return (m.forward(th.data(), x).array() * w.array()).sum(); };
        Mlp::Tape tape;
        m.forward(theta.data(), x, &tape);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        m.backward(theta.data(), tape, w, g.data());
        worst = std::max(worst, relative_error(g, central_diff(loss, theta)));
        ++checks;
        theta += 0.05 * Eigen::VectorXd::NullaryExpr(theta.size(), [&] { return U(rng); });
      }
    } else {
      const int s = in, a = out;
      const Critic c(s, a, hidden);
      Eigen::VectorXd theta(c.num_params());
      c.initialise(theta, rng);
      theta += 0.1 * Eigen::VectorXd::NullaryExpr(theta.size(), [&] { return U(rng); });
      for (int point = 0; point < 5; ++point) {
        const Eigen::MatrixXd S = rand_mat(s, 4), A = rand_mat(a, 4);
        const Eigen::RowVectorXd w = rand_mat(1, 4).row(0);
        auto loss = [&](const Eigen::VectorXd& th) { return (c.forward(th, S, A).array() * w.array()).sum(); };
        Critic::Tape tape;
        c.forward(theta, S, A, &tape);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        Eigen::MatrixXd dA;
        c.backward(theta, tape, w, g, &dA);
        worst = std::max(worst, relative_error(g, central_diff(loss, theta)));
        auto loss_a = [&](const Eigen::VectorXd& av) {
          return (c.forward(theta, S, Eigen::Map<const Eigen::MatrixXd>(av.data(), a, 4)).array() * w.array()).sum();
        };
        const Eigen::VectorXd aflat = Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
        const Eigen::VectorXd daflat = Eigen::Map<const Eigen::VectorXd>(dA.data(), dA.size());
        worst = std::max(worst, relative_error(daflat, central_diff(loss_a, aflat)));
        checks += 2;
      }
    }
  }

  // Soft update: target <- tau*online + (1-tau)*target, elementwise, exactly.
  bool identities = true;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd online = rand_mat(9, 1).col(0);
    Eigen::VectorXd target = rand_mat(9, 1).col(0);
    const Eigen::VectorXd before = target;
    const double tau = U01(rng);
    soft_update(target, online, tau);
    for (Eigen::Index i = 0; i < 9; ++i) identities &= target[i] == tau * online[i] + (1.0 - tau) * before[i];
    Eigen::VectorXd same = online;
    soft_update(same, online, tau);
    for (Eigen::Index i = 0; i < 9; ++i)
      identities &= std::abs(same[i] - online[i]) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(online[i]);
  }
  // TD targets: zero networks give Q' = critic output bias = 0, so y = r exactly;
  // gamma = 0 gives y = r; terminal transitions give y = r.
  AgentConfig ac;
  ac.num_vehicles = 2;
  ac.actor_hidden = {4};
  ac.critic_hidden = {4};
  ac.gamma = 0.9;
  DdpgAgent agent(ac);
  agent.critic_target_params().setZero();
  std::vector<Transition> batch(6);
  std::vector<const Transition*> ptr;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i] = {rand_mat(8, 1).col(0), rand_mat(4, 1).col(0), U(rng), rand_mat(8, 1).col(0), i % 2 == 0};
    ptr.push_back(&batch[i]);
  }
  Eigen::RowVectorXd y = agent.td_targets(ptr);
  for (std::size_t i = 0; i < batch.size(); ++i) identities &= y[static_cast<Eigen::Index>(i)] == batch[i].reward;
  // Non-zero target critic: y = r + gamma * Q' for non-terminal, r for terminal.
  Rng init(5);
  agent.critic().initialise(agent.critic_target_params(), init);
  y = agent.td_targets(ptr);
  const Eigen::MatrixXd s2 = [&] {
    Eigen::MatrixXd m(8, 6);
    for (int i = 0; i < 6; ++i) m.col(i) = batch[static_cast<std::size_t>(i)].next_state;
    return m;
  }();
  const Eigen::RowVectorXd q2 =
      agent.critic().forward(agent.critic_target_params(), s2, agent.actor().forward(agent.actor_target_params(), s2));
  for (int i = 0; i < 6; ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)];
    identities &= y[i] == (t.terminal ? t.reward : t.reward + ac.gamma * q2[i]);
  }
  return {worst < 1e-4 && identities,
          fmt("%d gradient checks on 20 random nets: max rel err %.3e; soft-update and td-target identities %s", checks,
              worst, identities ? "hold" : "VIOLATED")};
}

SimConfig learning_config() {
  SimConfig c = parse_config(
      "scenario.num_vehicles = 10\n"
      "scenario.num_uavs = 2\n"
      "tasks.total_load_mb = 14\n"
      "agent.batch_size = 64\n"
      "agent.buffer_capacity = 20000\n"
      "agent.sigma_explore = 0.2\n"
      "agent.sigma_decay = 0.99\n"
      "agent.actor_lr = 0.0003\n"
      "agent.tau = 0.01\n"
      "scheduler.mode = off\n"
      "run.slots = 10\n"
      "run.updates_per_slot = 2\n");
  return c;
}

double episode_reward(Simulation& sim, std::uint64_t seed) {
  const EpisodeResult r = run_episode(sim, seed);
  double s = 0.0;
  for (const SlotMetrics& m : r.metrics) s += m.reward;
  return s / static_cast<double>(std::max<std::size_t>(1, r.metrics.size()));
}

Outcome c10_learning() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = 10;
  SimConfig train = learning_config();
  Simulation trainer(train);
  SimConfig eval_cfg = train;
  eval_cfg.run.mode = RunMode::eval;
  Simulation greedy(eval_cfg, trainer.agent_ptr());
  double greedy_sum = 0.0;
  int greedy_n = 0;
  for (int e = 0; e < 200; ++e) {
    run_episode(trainer, seed);
    if (e >= 150) {
      greedy_sum += episode_reward(greedy, seed);
      ++greedy_n;
    }
  }
  Simulation random(eval_cfg);
  Rng rng(1010);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  random.set_policy([&](const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::NullaryExpr(eval_cfg.agent.action_dim(), [&] { return U(rng); }));
  });
  double random_sum = 0.0;
  for (int e = 0; e < 50; ++e) random_sum += episode_reward(random, seed);
  // Reference point: every vehicle at full power with equal priority.
  Simulation full(eval_cfg);
  full.set_policy([&](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Ones(eval_cfg.agent.action_dim())); });
  const double f = episode_reward(full, seed);
  const double g = greedy_sum / greedy_n, r = random_sum / 50.0;
  const double improvement = (g - r) / std::abs(r);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {improvement >= 0.2,
          fmt("greedy mean reward %.4f (last 50 of 200 episodes) vs random %.4f: improvement %.1f%% (need 20%%); "
              "constant full-power policy scores %.4f (%.1f%%), %.0f s",
              g, r, 100 * improvement, f, 100 * (f - r) / std::abs(r), secs)};
}

Outcome c11_scheduler() {
  SimConfig rule = preset_config({"load-50"});
  rule.run.mode = RunMode::eval;
  rule.scheduler.mode = SchedulerMode::rule;
  SimConfig off = rule;
  off.scheduler.mode = SchedulerMode::off;
  double s_rule = 0.0, s_off = 0.0;
  std::string per;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    double a = 0.0, b = 0.0;
    for (const SlotResult& s : run_slots(rule, seed, 50)) a += s.metrics.success_rate / 50.0;
    for (const SlotResult& s : run_slots(off, seed, 50)) b += s.metrics.success_rate / 50.0;
    s_rule += a / 5.0;
    s_off += b / 5.0;
    per += fmt(" %.4f/%.4f", a, b);
  }
  return {s_rule >= s_off, fmt("success rule %.4f vs off %.4f, effect size %+.4f (per seed rule/off:%s)", s_rule, s_off,
                               s_rule - s_off, per.c_str())};
}

Outcome c12_reward_decoupling() {
  SimConfig cfg = preset_config({});
  cfg.scheduler.mode = SchedulerMode::rule;
  cfg.run.mode = RunMode::train;
  Simulation sim(cfg);
  std::vector<SlotTrace> traces;
  const EpisodeResult ep = run_episode(sim, 12, [&](const SlotResult& s) { traces.push_back(s.trace); });
  const OffloadParams params =
      OffloadParams::from(cfg.tasks, cfg.scenario.num_uavs, cfg.scenario.slot_duration_s, cfg.energy);
  const ReplayBuffer& buf = sim.agent().buffer();
  int mismatches = 0, adjusted = 0;
  if (buf.size() != traces.size()) ++mismatches;
  for (std::size_t t = 0; t < std::min(buf.size(), traces.size()); ++t) {
    const double psi = offload_cost(traces[t].plan1.rows, traces[t].lp1_vehicles, params);
    if (buf.at(t).reward != -psi) ++mismatches;
    if (traces[t].lp2_solved && traces[t].final_plan.objective != traces[t].plan1.objective) ++adjusted;
  }
  return {mismatches == 0 && !ep.aborted,
          fmt("%zu stored rewards over a %d-slot episode, %d differ from -Psi_drl (bit-exact); %d slots had Psi* != "
              "Psi_drl",
              buf.size(), cfg.run.slots, mismatches, adjusted)};
}

Outcome c13_invariants() {
  Rng rng(1313);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const ChannelConfig ch;
  const int per = 20000;
  int simplex = 0, rb = 0, bandwidth = 0, fifo = 0, energy = 0;

  // Simplex: LP plans on random instances.
  std::mt19937_64 orng(77);
  for (int k = 0; k < per; ++k) {
    OffloadParams p;
    const auto vs = gen::random_offload(orng, 3, p);
    const OffloadPlan plan = solve_offload(build_offload_lp(vs, p));
    if (!plan.ok()) {
      ++simplex;
      continue;
    }
    for (const OffloadRow& r : plan.rows) {
      const double s = r.gamma_local + r.gamma_bs + r.gamma_uav;
      if (std::abs(s - 1.0) > 1e-9 || std::min({r.gamma_local, r.gamma_bs, r.gamma_uav}) < 0.0) ++simplex;
    }
  }

  // RB conservation under arbitrary macro-actions.
  const SchedulerLimits limits;
  std::uniform_int_distribution<int> veh(-1, 12), cnt(-1, 60), nact(0, 24);
  for (int k = 0; k < per; ++k) {
    const int n = 1 + k % 12;
    std::vector<LinkContext> ctx(static_cast<std::size_t>(n));
    Eigen::VectorXd a(2 * n);
    for (int i = 0; i < n; ++i) {
      ctx[static_cast<std::size_t>(i)] = {i, U(rng) < 0.9, U(rng) < 0.6, {}, {}};
      a[2 * i] = U(rng);
      a[2 * i + 1] = U(rng);
    }
    const ResourceAllocation alloc = map_action_to_allocation(a, ctx, ch);
    std::vector<MacroAction> acts;
    for (int j = nact(rng); j > 0; --j) {
      const auto lk = [&] { return U(rng) < 0.5 ? LinkKind::v2i : LinkKind::v2u; };
      if (U(rng) < 0.5)
        acts.push_back(MacroAction::transfer(veh(rng), lk(), veh(rng), lk(), cnt(rng)));
      else
        acts.push_back(MacroAction::power(veh(rng), lk(), -5.0 + 35.0 * U(rng)));
    }
    const ApplyResult res = validate_and_apply(acts, alloc, limits);
    std::multiset<int> before, after;
    for (const auto& va : alloc.vehicles)
      for (const LinkAllocation* l : {&va.v2i, &va.v2u}) before.insert(l->rbs.begin(), l->rbs.end());
    for (const auto& va : res.allocation.vehicles)
      for (const LinkAllocation* l : {&va.v2i, &va.v2u}) after.insert(l->rbs.begin(), l->rbs.end());
    const bool dup = std::set<int>(after.begin(), after.end()).size() != after.size();
    if (before != after || dup || !check_allocation(res.allocation, ch.p_min_dbm, ch.p_max_dbm).empty() ||
        static_cast<int>(res.applied.size()) > limits.max_actions)
      ++rb;
    // Bandwidth cap on the mapped allocation itself.
    if (alloc.used_rbs() * ch.rb_bandwidth_hz > ch.total_bandwidth_hz + 1e-6 ||
        res.allocation.used_rbs() * ch.rb_bandwidth_hz > ch.total_bandwidth_hz + 1e-6)
      ++bandwidth;
  }

  // Queue FIFO monotonicity on random fragment sets.
  for (int k = 0; k < per; ++k) {
    QueueState q = QueueState::fresh(kBsNode, 9e9, 1000.0, 1.0);
    std::vector<Fragment> frags;
    double total = 0.0;
    const int n = 1 + k % 8;
    for (int i = 0; i < n; ++i) {
      const double bits = 0.1e6 + 1.0e6 * U(rng);
      if (total + bits > q.capacity_bits()) break;
      total += bits;
      frags.push_back({i, k % 3 == 0 ? 0.1 * (i % 2) : 0.5 * U(rng), bits * 1000.0 / 9e9, bits});
    }
    const auto recs = replay_queue(q, frags);
    double prev_done = 0.0;
    bool ok = recs.size() == frags.size();
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const ReplayRecord& r = recs[i];
      const double start = r.arrival_s + r.delay_s;
      ok &= r.delay_s >= 0.0 && start >= prev_done - 1e-12 && r.completion_s >= start;
      ok &= std::abs(r.completion_s - (start + r.service_s)) <= 1e-12;
      if (i > 0) ok &= r.arrival_s >= recs[i - 1].arrival_s && r.completion_s >= recs[i - 1].completion_s;
      prev_done = r.completion_s;
    }
    if (!ok) ++fifo;
  }

  // Energy decomposition: comm + compute recomputed per term equals the row energy.
  std::mt19937_64 erng(99);
  for (int k = 0; k < per; ++k) {
    OffloadParams p;
    const auto vs = gen::random_offload(erng, 3, p);
    for (const OffloadVehicle& v : vs) {
      OffloadRow r;
      const double a = U(rng), b = v.has_bs() ? U(rng) * (1 - a) : 0.0;
      r.gamma_uav = v.has_uav() ? a : 0.0;
      r.gamma_bs = b;
      r.gamma_local = 1.0 - r.gamma_uav - r.gamma_bs;
      evaluate_row(r, v, p);
      const double D = v.task_bits, c = p.cycles_per_bit;
      double comm = 0.0, comp = p.kappa * c * D * r.gamma_local * p.local_hz * p.local_hz;
      if (v.has_bs()) {
        comm += dbm_to_watt(v.power_v2i_dbm) * r.gamma_bs * D / v.rate_v2i_bps;
        comp += p.kappa * c * D * r.gamma_bs * p.bs_hz * p.bs_hz;
      }
      if (v.has_uav()) {
        const double f = p.uav_hz[static_cast<std::size_t>(*v.serving_uav)];
        comm += dbm_to_watt(v.power_v2u_dbm) * r.gamma_uav * D / v.rate_v2u_bps;
        comp += p.kappa * c * D * r.gamma_uav * f * f;
      }
      if (std::abs(comm + comp - r.energy_j) > 1e-12 * std::max(1.0, std::abs(r.energy_j))) ++energy;
    }
  }
  const int total = simplex + rb + bandwidth + fifo + energy;
  return {total == 0, fmt("%d fuzz cases: simplex %d, RB conservation %d, bandwidth cap %d, queue FIFO %d, energy "
                          "decomposition %d violations",
                          5 * per, simplex, rb, bandwidth, fifo, energy)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "channel-exactness", c01_channel},
      {2, "solver-oracle-equivalence", c02_solver},
      {3, "offload-lp-vs-brute-force", c03_offload_bruteforce},
      {4, "trajectory-safety-fuzz", c04_trajectory_safety},
      {5, "trajectory-quality", c05_trajectory_quality},
      {6, "coverage-trend", c06_coverage_trend},
      {7, "capacity-saturation", c07_capacity},
      {8, "makespan-balance", c08_makespan},
      {9, "ddpg-correctness", c09_ddpg},
      {10, "learning-sanity", c10_learning},
      {11, "scheduler-benefit", c11_scheduler},
      {12, "reward-decoupling", c12_reward_decoupling},
      {13, "invariant-suite", c13_invariants},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--list")) {
      for (const Criterion& c : criteria()) std::printf("%02d %s\n", c.id, c.name);
      return 0;
    }
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
  }
  int failed = 0;
  for (const Criterion& c : criteria()) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %02d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
