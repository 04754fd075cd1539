#include "uavmec/offload_lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace uavmec {

OffloadParams OffloadParams::from(const TaskConfig& tasks, int num_uavs, double slot_duration_s,
                                  const EnergyConfig& energy) {
  OffloadParams p;
  p.cycles_per_bit = tasks.cycles_per_bit;
  p.local_hz = tasks.local_hz;
  p.bs_hz = tasks.bs_hz;
  p.uav_hz.assign(static_cast<std::size_t>(std::max(num_uavs, 0)), tasks.uav_hz);
  p.slot_duration_s = slot_duration_s;
  p.kappa = energy.kappa;
  p.weights = energy.objective;
  return p;
}

double OffloadParams::uav_capacity_bits(int u) const {
  return capacity_cap_bits(uav_hz.at(static_cast<std::size_t>(u)), slot_duration_s, cycles_per_bit);
}

BranchCoefficients branch_coefficients(const OffloadVehicle& v, const OffloadParams& p) {
  BranchCoefficients b;
  const double D = v.task_bits, c = p.cycles_per_bit;
  b.local_time = D * c / p.local_hz;
  b.local_energy = p.kappa * p.local_hz * p.local_hz * D * c;
  if (v.has_bs()) {
    b.bs_time = D / v.rate_v2i_bps + D * c / p.bs_hz;
    b.bs_energy = dbm_to_watt(v.power_v2i_dbm) * D / v.rate_v2i_bps + p.kappa * p.bs_hz * p.bs_hz * D * c;
  }
  if (v.has_uav()) {
    const double f = p.uav_hz.at(static_cast<std::size_t>(*v.serving_uav));
    b.uav_time = D / v.rate_v2u_bps + D * c / f;
    b.uav_energy = dbm_to_watt(v.power_v2u_dbm) * D / v.rate_v2u_bps + p.kappa * f * f * D * c;
  }
  return b;
}

OffloadLp build_offload_lp(const std::vector<OffloadVehicle>& vehicles, const OffloadParams& params) {
  OffloadLp out;
  out.vehicles = vehicles;
  out.params = params;
  const int M = static_cast<int>(vehicles.size());
  const int U = static_cast<int>(params.uav_hz.size());
  for (const OffloadVehicle& v : vehicles) {
    if (v.task_bits < 0.0 || !(v.deadline_s > 0.0)) throw ConfigError("offload: task bits >= 0 and deadline > 0 required");
    if (v.serving_uav && (*v.serving_uav < 0 || *v.serving_uav >= U)) throw ConfigError("offload: serving UAV out of range");
  }

  int n = 0;
  out.col_local.assign(static_cast<std::size_t>(M), -1);
  out.col_bs.assign(static_cast<std::size_t>(M), -1);
  out.col_uav.assign(static_cast<std::size_t>(M), -1);
  out.col_t.assign(static_cast<std::size_t>(M), -1);
  out.col_xi.assign(static_cast<std::size_t>(M), -1);
  for (int m = 0; m < M; ++m) {
    const auto i = static_cast<std::size_t>(m);
    out.col_local[i] = n++;
    if (vehicles[i].has_bs()) out.col_bs[i] = n++;
    if (vehicles[i].has_uav()) out.col_uav[i] = n++;
    out.col_t[i] = n++;
    out.col_xi[i] = n++;
  }

  LinearProgram& lp = out.lp;
  lp.c = Eigen::VectorXd::Zero(n);
  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  lp.A_eq = Eigen::MatrixXd::Zero(M, n);
  lp.b_eq = Eigen::VectorXd::Ones(M);

  // Rows: BS capacity, one per UAV, then local / BS / UAV time and deadline per vehicle.
  int rows = 1 + U;
  for (int m = 0; m < M; ++m)
    rows += 2 + (out.col_bs[static_cast<std::size_t>(m)] >= 0) + (out.col_uav[static_cast<std::size_t>(m)] >= 0);
  lp.A_ineq = Eigen::MatrixXd::Zero(rows, n);
  lp.b_ineq = Eigen::VectorXd::Zero(rows);
  lp.b_ineq[0] = params.bs_capacity_bits() / kBitsPerMb;
  for (int u = 0; u < U; ++u) lp.b_ineq[1 + u] = params.uav_capacity_bits(u) / kBitsPerMb;

  const ObjectiveWeights& w = params.weights;
  int row = 1 + U;
  for (int m = 0; m < M; ++m) {
    const auto i = static_cast<std::size_t>(m);
    const OffloadVehicle& v = vehicles[i];
    const BranchCoefficients b = branch_coefficients(v, params);
    const int co = out.col_local[i], cb = out.col_bs[i], cu = out.col_uav[i], ct = out.col_t[i], cx = out.col_xi[i];

    lp.upper[co] = 1.0;
    lp.A_eq(m, co) = 1.0;
    lp.c[co] = w.energy * b.local_energy;
    lp.c[ct] = w.delay / v.deadline_s;
    lp.c[cx] = w.penalty;

    lp.A_ineq(row, co) = b.local_time;  // local_time * g_o - T <= 0
    lp.A_ineq(row++, ct) = -1.0;
    if (cb >= 0) {
      lp.upper[cb] = 1.0;
      lp.A_eq(m, cb) = 1.0;
      lp.c[cb] = w.energy * b.bs_energy;
      lp.A_ineq(0, cb) = v.task_bits / kBitsPerMb;
      lp.A_ineq(row, cb) = b.bs_time;
      lp.A_ineq(row, ct) = -1.0;
      lp.b_ineq[row++] = -v.queue_bs_s;
    }
    if (cu >= 0) {
      lp.upper[cu] = 1.0;
      lp.A_eq(m, cu) = 1.0;
      lp.c[cu] = w.energy * b.uav_energy;
      lp.A_ineq(1 + *v.serving_uav, cu) = v.task_bits / kBitsPerMb;
      lp.A_ineq(row, cu) = b.uav_time;
      lp.A_ineq(row, ct) = -1.0;
      lp.b_ineq[row++] = -v.queue_uav_s;
    }
    lp.A_ineq(row, ct) = 1.0;  // T - xi <= T_max
    lp.A_ineq(row, cx) = -1.0;
    lp.b_ineq[row++] = v.deadline_s;
  }
  return out;
}

void evaluate_row(OffloadRow& row, const OffloadVehicle& v, const OffloadParams& params) {
  const BranchCoefficients b = branch_coefficients(v, params);
  row.vehicle = v.id;
  row.serving_uav = v.serving_uav;
  row.deadline_s = v.deadline_s;
  row.local_s = b.local_time * row.gamma_local;
  row.bs_s = v.has_bs() ? b.bs_time * row.gamma_bs + v.queue_bs_s : 0.0;
  row.uav_s = v.has_uav() ? b.uav_time * row.gamma_uav + v.queue_uav_s : 0.0;
  row.completion_s = std::max({row.local_s, row.bs_s, row.uav_s});
  row.penalty_s = std::max(0.0, row.completion_s - v.deadline_s);
  row.energy_j = b.local_energy * row.gamma_local + b.bs_energy * row.gamma_bs + b.uav_energy * row.gamma_uav;
}

namespace {

void summarise(OffloadPlan& plan, const std::vector<OffloadVehicle>& vehicles, const OffloadParams& params) {
  plan.energy_j = 0.0;
  plan.bs_admitted_bits = 0.0;
  plan.uav_admitted_bits.assign(params.uav_hz.size(), 0.0);
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    OffloadRow& r = plan.rows[i];
    evaluate_row(r, vehicles[i], params);
    plan.energy_j += r.energy_j;
    plan.bs_admitted_bits += vehicles[i].task_bits * r.gamma_bs;
    if (vehicles[i].serving_uav)
      plan.uav_admitted_bits[static_cast<std::size_t>(*vehicles[i].serving_uav)] += vehicles[i].task_bits * r.gamma_uav;
  }
  plan.objective = offload_cost(plan.rows, vehicles, params);
}

// Move any capacity overshoot of one node back to local computation.
void enforce_capacity(std::vector<OffloadRow>& rows, const std::vector<OffloadVehicle>& vehicles, double cap,
                      const std::function<double*(OffloadRow&, const OffloadVehicle&)>& share) {
  double used = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (double* g = share(rows[i], vehicles[i])) used += vehicles[i].task_bits * *g;
  if (used <= cap) return;
  const double k = cap / used * (1.0 - 1e-12);  // margin for summation rounding
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (double* g = share(rows[i], vehicles[i])) {
      const double moved = *g * (1.0 - k);
      *g -= moved;
      rows[i].gamma_local += moved;
    }
}

}  // namespace

namespace {

OffloadPlan plan_from(const OffloadLp& olp, const Eigen::VectorXd& x) {
  OffloadPlan plan;
  const auto& vs = olp.vehicles;
  plan.rows.resize(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    OffloadRow& row = plan.rows[i];
    auto take = [&](int col) { return col >= 0 ? std::clamp(x[col], 0.0, 1.0) : 0.0; };
    row.gamma_bs = take(olp.col_bs[i]);
    row.gamma_uav = take(olp.col_uav[i]);
    const double off = row.gamma_bs + row.gamma_uav;
    if (off > 1.0) {
      row.gamma_bs /= off;
      row.gamma_uav /= off;
    }
    row.gamma_local = std::max(0.0, 1.0 - row.gamma_bs - row.gamma_uav);
  }
  enforce_capacity(plan.rows, vs, olp.params.bs_capacity_bits(),
                   [](OffloadRow& row, const OffloadVehicle&) { return &row.gamma_bs; });
  for (int u = 0; u < static_cast<int>(olp.params.uav_hz.size()); ++u)
    enforce_capacity(plan.rows, vs, olp.params.uav_capacity_bits(u),
                     [u](OffloadRow& row, const OffloadVehicle& v) {
                       return v.serving_uav == u ? &row.gamma_uav : nullptr;
                     });
  summarise(plan, vs, olp.params);
  return plan;
}

// Once a capacity binds, the optimum is usually a whole face and the IPM lands
// mid-face. Second pass: hold the objective, minimise sum(T - t_branch).
std::optional<Eigen::VectorXd> balance_ties(const OffloadLp& olp, const Eigen::VectorXd& x, const SolverOptions& opts) {
  LinearProgram lp = olp.lp;
  const double best = olp.lp.c.dot(x);
  const Eigen::Index r = lp.A_ineq.rows();
  lp.A_ineq.conservativeResize(r + 1, Eigen::NoChange);
  lp.A_ineq.row(r) = olp.lp.c.transpose();
  lp.b_ineq.conservativeResize(r + 1);
  lp.b_ineq[r] = best + 1e-9 * std::max(1.0, std::abs(best));

  lp.c.setZero();
  for (std::size_t i = 0; i < olp.vehicles.size(); ++i) {
    const BranchCoefficients b = branch_coefficients(olp.vehicles[i], olp.params);
    const int cb = olp.col_bs[i], cu = olp.col_uav[i];
    lp.c[olp.col_t[i]] = 1.0 + (cb >= 0) + (cu >= 0);
    lp.c[olp.col_local[i]] = -b.local_time;
    if (cb >= 0) lp.c[cb] = -b.bs_time;
    if (cu >= 0) lp.c[cu] = -b.uav_time;
  }
  const SolveResult second = solve_lp(lp, opts);
  if (!second.optimal()) return std::nullopt;
  return second.x;
}

}  // namespace

OffloadPlan solve_offload(const OffloadLp& olp, const SolverOptions& opts) {
  const SolveResult r = solve_lp(olp.lp, opts);
  if (!r.optimal()) {
    OffloadPlan failed;
    failed.status = r.status;
    failed.lp_objective = r.objective;
    return failed;
  }
  OffloadPlan plan = plan_from(olp, r.x);
  if (olp.vehicles.size() > 1) {
    if (const auto x = balance_ties(olp, r.x, opts)) {
      OffloadPlan balanced = plan_from(olp, *x);
      if (balanced.objective <= plan.objective + 1e-9 * std::max(1.0, std::abs(plan.objective)))
        plan = std::move(balanced);
    }
  }
  plan.status = r.status;
  plan.lp_objective = r.objective;
  return plan;
}

double offload_cost(const std::vector<OffloadRow>& rows, const std::vector<OffloadVehicle>& vehicles,
                    const OffloadParams& params) {
  if (rows.size() != vehicles.size()) throw ConfigError("offload_cost: rows and vehicles differ in length");
  const ObjectiveWeights& w = params.weights;
  double delay = 0.0, energy = 0.0, penalty = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    OffloadRow r = rows[i];
    evaluate_row(r, vehicles[i], params);
    delay += r.completion_s / r.deadline_s;
    energy += r.energy_j;
    penalty += r.penalty_s;
  }
  return w.delay * delay + w.energy * energy + w.penalty * penalty;
}

double OffloadViolation::worst() const { return std::max({simplex, bounds, capacity_bits, epigraph, deadline}); }

OffloadViolation check_offload_plan(const OffloadPlan& plan, const std::vector<OffloadVehicle>& vehicles,
                                    const OffloadParams& params) {
  OffloadViolation v;
  if (plan.rows.size() != vehicles.size()) throw ConfigError("check_offload_plan: rows and vehicles differ in length");
  double bs = 0.0;
  std::vector<double> uav(params.uav_hz.size(), 0.0);
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const OffloadRow& r = plan.rows[i];
    const OffloadVehicle& in = vehicles[i];
    v.simplex = std::max(v.simplex, std::abs(r.gamma_local + r.gamma_bs + r.gamma_uav - 1.0));
    for (double g : {r.gamma_local, r.gamma_bs, r.gamma_uav}) v.bounds = std::max({v.bounds, -g, g - 1.0});
    if (!in.has_bs()) v.bounds = std::max(v.bounds, std::abs(r.gamma_bs));
    if (!in.has_uav()) v.bounds = std::max(v.bounds, std::abs(r.gamma_uav));
    v.bounds = std::max(v.bounds, -r.penalty_s);
    bs += in.task_bits * r.gamma_bs;
    if (in.serving_uav) uav[static_cast<std::size_t>(*in.serving_uav)] += in.task_bits * r.gamma_uav;

    const double D = in.task_bits, c = params.cycles_per_bit;
    v.epigraph = std::max(v.epigraph, D * c / params.local_hz * r.gamma_local - r.completion_s);
    if (in.has_bs())
      v.epigraph = std::max(v.epigraph, (D / in.rate_v2i_bps + D * c / params.bs_hz) * r.gamma_bs + in.queue_bs_s -
                                            r.completion_s);
    if (in.has_uav()) {
      const double f = params.uav_hz[static_cast<std::size_t>(*in.serving_uav)];
      v.epigraph =
          std::max(v.epigraph, (D / in.rate_v2u_bps + D * c / f) * r.gamma_uav + in.queue_uav_s - r.completion_s);
    }
    v.deadline = std::max(v.deadline, r.completion_s - in.deadline_s - r.penalty_s);
  }
  v.capacity_bits = std::max(0.0, bs - params.bs_capacity_bits());
  for (std::size_t u = 0; u < uav.size(); ++u)
    v.capacity_bits = std::max(v.capacity_bits, uav[u] - params.uav_capacity_bits(static_cast<int>(u)));
  return v;
}

OffloadPlan brute_force_offload_oracle(const std::vector<OffloadVehicle>& vehicles, const OffloadParams& params,
                                       double step) {
  if (vehicles.size() > 3) throw ConfigError("brute_force_offload_oracle: at most 3 vehicles");
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("brute_force_offload_oracle: step must be in (0, 1]");
  const int K = static_cast<int>(std::llround(1.0 / step));

  // Candidate rows per vehicle with their cost contribution and node usage.
  struct Candidate {
    OffloadRow row;
    double cost = 0.0;
    double bs_bits = 0.0;
    double uav_bits = 0.0;
  };
  const ObjectiveWeights& w = params.weights;
  std::vector<std::vector<Candidate>> cands(vehicles.size());
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const OffloadVehicle& v = vehicles[i];
    const int kb = v.has_bs() ? K : 0, ku = v.has_uav() ? K : 0;
    for (int a = 0; a <= kb; ++a)
      for (int b = 0; a + b <= K && b <= ku; ++b) {
        Candidate c;
        c.row.gamma_bs = static_cast<double>(a) / K;
        c.row.gamma_uav = static_cast<double>(b) / K;
        c.row.gamma_local = static_cast<double>(K - a - b) / K;
        evaluate_row(c.row, v, params);
        c.cost = w.delay * c.row.completion_s / v.deadline_s + w.energy * c.row.energy_j + w.penalty * c.row.penalty_s;
        c.bs_bits = v.task_bits * c.row.gamma_bs;
        c.uav_bits = v.task_bits * c.row.gamma_uav;
        cands[i].push_back(c);
      }
  }

  OffloadPlan best;
  best.status = SolveStatus::infeasible;
  best.objective = kInf;
  std::vector<std::size_t> pick(vehicles.size(), 0);
  std::vector<double> uav_used(params.uav_hz.size(), 0.0);
  const double bs_cap = params.bs_capacity_bits() * (1.0 + 1e-12);
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t i, double cost, double bs_used) {
    if (cost >= best.objective) return;
    if (i == vehicles.size()) {
      best.objective = cost;
      best.status = SolveStatus::optimal;
      best.rows.clear();
      for (std::size_t k = 0; k < vehicles.size(); ++k) best.rows.push_back(cands[k][pick[k]].row);
      return;
    }
    const auto& serving = vehicles[i].serving_uav;
    for (std::size_t k = 0; k < cands[i].size(); ++k) {
      const Candidate& c = cands[i][k];
      if (bs_used + c.bs_bits > bs_cap) continue;
      if (serving) {
        const auto u = static_cast<std::size_t>(*serving);
        if (uav_used[u] + c.uav_bits > params.uav_capacity_bits(*serving) * (1.0 + 1e-12)) continue;
        uav_used[u] += c.uav_bits;
      }
      pick[i] = k;
      rec(i + 1, cost + c.cost, bs_used + c.bs_bits);
      if (serving) uav_used[static_cast<std::size_t>(*serving)] -= c.uav_bits;
    }
  };
  rec(0, 0.0, 0.0);
  if (best.ok()) {
    summarise(best, vehicles, params);
    best.lp_objective = best.objective;
  }
  return best;
}

ReplayedSlot replay_offload(const OffloadPlan& plan, const std::vector<OffloadVehicle>& vehicles,
                            const OffloadParams& params) {
  if (plan.rows.size() != vehicles.size()) throw ConfigError("replay_offload: rows and vehicles differ in length");
  const std::size_t M = vehicles.size();
  const double c = params.cycles_per_bit;
  ReplayedSlot out;
  out.queue_bs_s.assign(M, 0.0);
  out.queue_uav_s.assign(M, 0.0);
  out.completion_s.assign(M, 0.0);

  std::vector<Fragment> bs;
  std::vector<std::vector<Fragment>> uav(params.uav_hz.size());
  for (std::size_t i = 0; i < M; ++i) {
    const OffloadVehicle& v = vehicles[i];
    const OffloadRow& r = plan.rows[i];
    const int tag = static_cast<int>(i);
    if (v.has_bs() && r.gamma_bs > 0.0) {
      const double bits = r.gamma_bs * v.task_bits;
      bs.push_back({tag, bits / v.rate_v2i_bps, bits * c / params.bs_hz, bits});
    }
    if (v.has_uav() && r.gamma_uav > 0.0) {
      const auto u = static_cast<std::size_t>(*v.serving_uav);
      const double bits = r.gamma_uav * v.task_bits;
      uav[u].push_back({tag, bits / v.rate_v2u_bps, bits * c / params.uav_hz[u], bits});
    }
    out.completion_s[i] = compute_delay_s(r.gamma_local, v.task_bits, c, params.local_hz);
  }
  auto run = [&](QueueState q, std::vector<Fragment> frags, std::vector<double>& queue) {
    for (ReplayRecord rec : replay_queue(q, std::move(frags))) {
      const auto i = static_cast<std::size_t>(rec.vehicle);
      queue[i] = rec.delay_s;
      out.completion_s[i] = std::max(out.completion_s[i], rec.completion_s);
      rec.vehicle = vehicles[i].id;
      out.records.push_back(rec);
    }
  };
  run(QueueState::fresh(kBsNode, params.bs_hz, c, params.slot_duration_s), std::move(bs), out.queue_bs_s);
  for (std::size_t u = 0; u < uav.size(); ++u)
    run(QueueState::fresh(static_cast<int>(u), params.uav_hz[u], c, params.slot_duration_s), std::move(uav[u]),
        out.queue_uav_s);
  return out;
}

}  // namespace uavmec
