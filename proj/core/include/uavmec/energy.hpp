#pragma once

#include <vector>

#include "uavmec/common.hpp"

namespace uavmec {

struct ObjectiveWeights {
  double delay = 1.0;    // omega_1
  double energy = 0.001; // omega_2
  double penalty = 5.0;  // omega_3
};

struct EnergyConfig {
  double p_hover_w = 120.0;
  double v_ref_mps = 8.0;
  double c_d = 0.01;
  double mass_kg = 2.0;
  double g = kGravity;
  double c_v = 0.5;
  double alpha_descent = 0.3;
  double p_anc_w = 5.0;
  double kappa = 1e-27;
  /// Reporting weights for flight, compute and communication energy.
  double w_flight = 0.3;
  double w_compute = 1.0;
  double w_comm = 100.0;
  ObjectiveWeights objective{};

  void validate() const;
};

double horizontal_power_w(double v_xy, const EnergyConfig& cfg);
/// Signed: descent yields a negative (reduced) power.
double vertical_power_w(double v_z, const EnergyConfig& cfg);
/// Flight energy of one slot, floored at zero.
double uav_slot_energy_j(const Point3& prev, const Point3& next, double dt, const EnergyConfig& cfg);
double compute_energy_j(double f_hz, double time_s, double kappa);
double comm_energy_j(double power_dbm, double tx_delay_s);

struct EnergyBreakdown {
  double flight_j = 0.0;
  double compute_j = 0.0;
  double comm_j = 0.0;

  double total() const { return flight_j + compute_j + comm_j; }
  double weighted(const EnergyConfig& cfg) const {
    return cfg.w_flight * flight_j + cfg.w_compute * compute_j + cfg.w_comm * comm_j;
  }
};

struct SlotAggregates {
  std::vector<double> completion_s;
  std::vector<double> deadline_s;
  std::vector<double> penalty_s;
  double energy_j = 0.0;
};

/// omega_1 * sum T/T_max + omega_2 * E + omega_3 * sum xi.
double system_objective(const SlotAggregates& a, const ObjectiveWeights& w);

}  // namespace uavmec
