#include <algorithm>
#include <cmath>

#include "uavmec/macro_scheduler.hpp"

namespace uavmec {

double balanced_completion(const OffloadVehicle& v, const OffloadParams& p) {
  if (v.task_bits <= 0.0) return 0.0;
  const BranchCoefficients b = branch_coefficients(v, p);
  // Every present branch contributes its queue estimate to the max, so the
  // makespan is at least the largest one; above that all branches share load.
  double q_max = 0.0, inv_sum = 1.0 / b.local_time, weighted = 0.0;
  auto add = [&](double slope, double queue) {
    q_max = std::max(q_max, queue);
    inv_sum += 1.0 / slope;
    weighted += queue / slope;
  };
  if (v.has_bs()) add(b.bs_time, v.queue_bs_s);
  if (v.has_uav()) add(b.uav_time, v.queue_uav_s);
  return std::max(q_max, (1.0 + weighted) / inv_sum);
}

namespace {

void check_aligned(const SlotSnapshot& snap, int i, const ResourceAllocation& alloc) {
  const auto k = static_cast<std::size_t>(i);
  if (i < 0 || k >= snap.vehicles.size() || k >= alloc.vehicles.size() || k >= snap.plan.rows.size() ||
      snap.vehicles[k].id != alloc.vehicles[k].vehicle)
    throw ConfigError("scheduler: snapshot, plan and allocation must list the same vehicles in the same order");
}

double link_rate(const SlotSnapshot& snap, int i, LinkKind k, const LinkAllocation& la) {
  return la.active && la.rb_count() > 0 ? snap.rate(i, k, la) : 0.0;
}

}  // namespace

double projected_completion(const SlotSnapshot& snap, int i, const ResourceAllocation& alloc) {
  check_aligned(snap, i, alloc);
  const auto k = static_cast<std::size_t>(i);
  const OffloadVehicle& base = snap.vehicles[k];
  OffloadVehicle now = base;
  const VehicleAllocation& va = alloc.vehicles[k];
  now.rate_v2i_bps = link_rate(snap, i, LinkKind::v2i, va.v2i);
  now.rate_v2u_bps = link_rate(snap, i, LinkKind::v2u, va.v2u);
  now.power_v2i_dbm = va.v2i.power_dbm;
  now.power_v2u_dbm = va.v2u.power_dbm;
  return snap.plan.rows[k].completion_s + balanced_completion(now, snap.params) -
         balanced_completion(base, snap.params);
}

std::vector<MacroAction> rule_based_actions(const TaskOutcomes& outcomes, const ResourceAllocation& alloc,
                                            const SlotSnapshot& snap, const SchedulerLimits& limits) {
  std::vector<MacroAction> actions;
  ResourceAllocation work = alloc;
  auto budget_left = [&] { return static_cast<int>(actions.size()) < limits.max_actions; };
  auto slack = [&](int i) {
    return snap.plan.rows[static_cast<std::size_t>(i)].deadline_s - projected_completion(snap, i, work);
  };
  auto commit = [&](const MacroAction& a) {
    ApplyResult r = validate_and_apply({a}, work, limits, snap.gain);
    if (r.applied.empty()) return false;
    work = std::move(r.allocation);
    actions.push_back(a);
    return true;
  };

  for (const TaskOutcome& f : outcomes.failed) {
    if (!budget_left()) break;
    const int fi = work.index_of(f.vehicle);
    if (fi < 0) continue;
    check_aligned(snap, fi, work);
    const VehicleAllocation& fv = work.vehicles[static_cast<std::size_t>(fi)];

    // Bottleneck: the slower of the vehicle's existing links.
    std::optional<LinkKind> neck;
    double neck_rate = kInf;
    for (LinkKind k : {LinkKind::v2i, LinkKind::v2u}) {
      const LinkAllocation& la = fv.link(k);
      if (!la.active) continue;
      const double r = link_rate(snap, fi, k, la);
      if (r < neck_rate) {
        neck_rate = r;
        neck = k;
      }
    }
    if (!neck) continue;

    // Power only matters on a link that holds RBs.
    std::optional<LinkKind> boost;
    double boost_rate = kInf;
    for (LinkKind k : {LinkKind::v2i, LinkKind::v2u}) {
      const LinkAllocation& la = fv.link(k);
      if (!la.active || la.rb_count() == 0) continue;
      const double r = link_rate(snap, fi, k, la);
      if (r < boost_rate) {
        boost_rate = r;
        boost = k;
      }
    }
    if (boost && fv.link(*boost).power_dbm < limits.p_max_dbm)
      commit(MacroAction::power(f.vehicle, *boost, limits.p_max_dbm));

    for (const TaskOutcome& d : outcomes.surplus) {
      if (!budget_left() || slack(fi) >= 0.0) break;
      const int di = work.index_of(d.vehicle);
      if (di < 0 || di == fi) continue;
      while (budget_left() && slack(fi) < 0.0) {
        const VehicleAllocation& dv = work.vehicles[static_cast<std::size_t>(di)];
        const LinkKind rich = dv.v2u.active && dv.v2u.rb_count() > dv.v2i.rb_count() ? LinkKind::v2u : LinkKind::v2i;
        if (!dv.link(rich).active || dv.link(rich).rb_count() < 2) break;
        const MacroAction t = MacroAction::transfer(d.vehicle, rich, f.vehicle, *neck, 1);
        ApplyResult trial = validate_and_apply({t}, work, limits, snap.gain);
        if (trial.applied.empty()) break;
        const double before = projected_completion(snap, fi, work);
        const double after = projected_completion(snap, fi, trial.allocation);
        const double donor_slack =
            snap.plan.rows[static_cast<std::size_t>(di)].deadline_s - projected_completion(snap, di, trial.allocation);
        if (!(after < before) || donor_slack < 0.0) break;
        work = std::move(trial.allocation);
        actions.push_back(t);
      }
    }
  }
  return actions;
}

}  // namespace uavmec
