#pragma once

#include <optional>
#include <vector>

#include "uavmec/energy.hpp"
#include "uavmec/solver.hpp"
#include "uavmec/tasks.hpp"

namespace uavmec {

/// Per-vehicle inputs of one offloading LP. A branch with zero rate is absent.
struct OffloadVehicle {
  int id = 0;
  double task_bits = 0.0;
  double deadline_s = 1.0;
  std::optional<int> serving_uav;
  double rate_v2i_bps = 0.0;
  double rate_v2u_bps = 0.0;
  double power_v2i_dbm = 23.0;
  double power_v2u_dbm = 23.0;
  /// Q-hat for the BS and the serving UAV.
  double queue_bs_s = 0.0;
  double queue_uav_s = 0.0;

  bool has_bs() const { return task_bits > 0.0 && rate_v2i_bps > 0.0; }
  bool has_uav() const { return task_bits > 0.0 && serving_uav.has_value() && rate_v2u_bps > 0.0; }
};

struct OffloadParams {
  double cycles_per_bit = 1000.0;
  double local_hz = 0.5e9;
  double bs_hz = 9e9;
  /// Compute frequency per UAV index.
  std::vector<double> uav_hz;
  double slot_duration_s = 1.0;
  double kappa = 1e-27;
  ObjectiveWeights weights{};

  static OffloadParams from(const TaskConfig& tasks, int num_uavs, double slot_duration_s, const EnergyConfig& energy);
  double bs_capacity_bits() const { return capacity_cap_bits(bs_hz, slot_duration_s, cycles_per_bit); }
  double uav_capacity_bits(int u) const;
};

/// Branch slopes of one vehicle: completion time and energy per unit fraction.
struct BranchCoefficients {
  double local_time = 0.0, bs_time = 0.0, uav_time = 0.0;
  double local_energy = 0.0, bs_energy = 0.0, uav_energy = 0.0;
};

BranchCoefficients branch_coefficients(const OffloadVehicle& v, const OffloadParams& p);

struct OffloadRow {
  int vehicle = 0;
  double gamma_local = 1.0;
  double gamma_uav = 0.0;
  double gamma_bs = 0.0;
  std::optional<int> serving_uav;
  /// Estimated branch times; a present offload branch always carries its queue estimate.
  double local_s = 0.0, uav_s = 0.0, bs_s = 0.0;
  double completion_s = 0.0;
  double penalty_s = 0.0;
  double energy_j = 0.0;
  double deadline_s = 1.0;
};

struct OffloadPlan {
  SolveStatus status = SolveStatus::numerical_error;
  std::vector<OffloadRow> rows;
  /// Objective of the returned (sanitised) plan.
  double objective = 0.0;
  /// Raw LP optimum reported by the solver.
  double lp_objective = 0.0;
  double energy_j = 0.0;
  double bs_admitted_bits = 0.0;
  std::vector<double> uav_admitted_bits;

  bool ok() const { return status == SolveStatus::optimal; }
};

struct OffloadLp {
  LinearProgram lp;
  std::vector<OffloadVehicle> vehicles;
  OffloadParams params;
  /// Column of each variable per vehicle; -1 when the branch is absent.
  std::vector<int> col_local, col_bs, col_uav, col_t, col_xi;
};

/// min w1 sum T/T_max + w2 E(gamma) + w3 sum xi over the simplex, capacity rows
/// (in Mb), the epigraph of the branch-time max and the deadline-with-slack rows.
/// The queue estimate of a present branch enters its time row as a constant.
OffloadLp build_offload_lp(const std::vector<OffloadVehicle>& vehicles, const OffloadParams& params);

/// Solve, then clamp the fractions onto the simplex and capacities and recompute
/// T and xi exactly from the branch expressions.
OffloadPlan solve_offload(const OffloadLp& lp, const SolverOptions& opts = {1e-9, 200});

/// Objective of given fractions with T = max branch and xi = [T - T_max]^+.
/// Throws ConfigError when rows and vehicles do not line up.
double offload_cost(const std::vector<OffloadRow>& rows, const std::vector<OffloadVehicle>& vehicles,
                    const OffloadParams& params);

/// Fill branch times, completion, penalty and energy of `row` from its fractions.
void evaluate_row(OffloadRow& row, const OffloadVehicle& v, const OffloadParams& params);

struct OffloadViolation {
  double simplex = 0.0;
  double bounds = 0.0;
  double capacity_bits = 0.0;
  double epigraph = 0.0;
  double deadline = 0.0;

  double worst() const;
};

/// Constraint check recomputed from the inputs alone.
OffloadViolation check_offload_plan(const OffloadPlan& plan, const std::vector<OffloadVehicle>& vehicles,
                                    const OffloadParams& params);

/// Exhaustive search over each vehicle's simplex grid at `step`; at most 3 vehicles.
OffloadPlan brute_force_offload_oracle(const std::vector<OffloadVehicle>& vehicles, const OffloadParams& params,
                                       double step);

/// Event replay of the plan through the BS and UAV queues.
struct ReplayedSlot {
  std::vector<double> queue_bs_s;
  std::vector<double> queue_uav_s;
  std::vector<double> completion_s;
  std::vector<ReplayRecord> records;
};

ReplayedSlot replay_offload(const OffloadPlan& plan, const std::vector<OffloadVehicle>& vehicles,
                            const OffloadParams& params);

}  // namespace uavmec
