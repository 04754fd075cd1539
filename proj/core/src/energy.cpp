#include "uavmec/energy.hpp"

#include <algorithm>
#include <cmath>

namespace uavmec {

void EnergyConfig::validate() const {
  if (!(alpha_descent > 0.0 && alpha_descent < 1.0)) throw ConfigError("energy.alpha_descent must lie in (0, 1)");
  if (kappa < 0.0) throw ConfigError("energy.kappa must be >= 0");
  if (p_hover_w < 0.0 || p_anc_w < 0.0) throw ConfigError("energy: powers must be >= 0");
  if (!(v_ref_mps > 0.0)) throw ConfigError("energy.v_ref_mps must be positive");
  if (c_d < 0.0 || c_v < 0.0 || mass_kg < 0.0 || g < 0.0) throw ConfigError("energy: negative coefficient");
  if (objective.delay < 0.0 || objective.energy < 0.0 || objective.penalty < 0.0)
    throw ConfigError("energy: objective weights must be >= 0");
}

double horizontal_power_w(double v_xy, const EnergyConfig& cfg) {
  if (v_xy < 0.0) throw DomainError("horizontal_power_w: negative speed");
  const double r = v_xy / cfg.v_ref_mps;
  return cfg.p_hover_w / (1.0 + r * r) + cfg.c_d * v_xy * v_xy * v_xy;
}

double vertical_power_w(double v_z, const EnergyConfig& cfg) {
  if (v_z > 0.0) return cfg.mass_kg * cfg.g * v_z + cfg.c_v * v_z * v_z;
  return cfg.alpha_descent * cfg.mass_kg * cfg.g * v_z;
}

double uav_slot_energy_j(const Point3& prev, const Point3& next, double dt, const EnergyConfig& cfg) {
  if (!(dt > 0.0)) throw DomainError("uav_slot_energy_j: dt must be positive");
  const double v_xy = horizontal_distance(prev.horizontal(), next.horizontal()) / dt;
  const double v_z = (next.z - prev.z) / dt;
  const double p = horizontal_power_w(v_xy, cfg) + vertical_power_w(v_z, cfg) + cfg.p_anc_w;
  return std::max(0.0, p * dt);
}

double compute_energy_j(double f_hz, double time_s, double kappa) { return kappa * f_hz * f_hz * f_hz * time_s; }

double comm_energy_j(double power_dbm, double tx_delay_s) { return dbm_to_watt(power_dbm) * tx_delay_s; }

double system_objective(const SlotAggregates& a, const ObjectiveWeights& w) {
  double delay = 0.0, penalty = 0.0;
  for (std::size_t m = 0; m < a.completion_s.size(); ++m) delay += a.completion_s[m] / a.deadline_s[m];
  for (double xi : a.penalty_s) penalty += xi;
  return w.delay * delay + w.energy * a.energy_j + w.penalty * penalty;
}

}  // namespace uavmec
