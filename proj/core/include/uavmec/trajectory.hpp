#pragma once

#include <optional>
#include <vector>

#include "uavmec/energy.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/solver.hpp"

namespace uavmec {

struct TrajectoryConfig {
  double beta_coverage = 1.0;   // beta_1, weight on the load slack r_j
  double beta_penalty = 0.05;   // beta_2, weight on the distance penalty N_j
  double beta_altitude = 0.02;  // beta_3
  double w_eng = 1.0;
  double c_xy = 1e-3;
  double c_up = 0.05;
  double c_down = 0.01;
  /// Lower bound of r_j. At -(2 * 2 Mb)^2 it never binds, so r_j = -s_j (2 D_j)^2.
  double r_min = -16.0;
  double n_max_m = 30.0;
  /// R_t weights on altitude (per metre) and flight energy (per joule).
  double omega_h = 0.01;
  double omega_e = 0.001;
  /// Permute the solve order by the slot index.
  bool rotate_order = false;

  void validate() const;
};

/// a x + b y + c <= 0
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double eval(Point2 p) const { return a * p.x + b * p.y + c; }
};

/// Boundary perpendicular to the segment other -> self, at distance d_min from
/// `other`, keeping `self`'s side. Throws GeometryError for coincident points.
HalfPlane tangent_halfplane(Point2 self, Point2 other, double d_min);

/// w_eng (c_xy |p - p_prev|^2 + c_up [dz]^+ + c_down [-dz]^+) evaluated directly.
double convex_energy_cost(const Point3& p, const Point3& prev, const TrajectoryConfig& cfg);

struct LocalVehicle {
  int id = 0;
  Point2 position;
  double load_mb = 0.0;
};

/// One UAV's cone program together with the data it was built from. Variable
/// order: x, y, z, climb, descent, then (s_j, r_j, N_j) for each local vehicle.
struct TrajectorySubproblem {
  ConeProgram program;
  std::vector<LocalVehicle> vehicles;
  /// Localised big-M of each coverage row.
  std::vector<double> m_linear;
  std::vector<HalfPlane> halfplanes;
  Point3 prev;
  double tan_theta = 0.0;
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0, z_lo = 0.0, z_hi = 0.0;

  static constexpr int kX = 0, kY = 1, kZ = 2, kClimb = 3, kDescent = 4, kFirstVehicle = 5;
  static int s_index(int j) { return kFirstVehicle + 3 * j; }
  static int r_index(int j) { return kFirstVehicle + 3 * j + 1; }
  static int n_index(int j) { return kFirstVehicle + 3 * j + 2; }
};

TrajectorySubproblem build_uav_subproblem(const UavState& uav, const std::vector<LocalVehicle>& vehicles,
                                          const std::vector<HalfPlane>& halfplanes, const ScenarioConfig& scn,
                                          const TrajectoryConfig& cfg);

/// True if the position meets bounds, motion limits and every half-plane to `tol`.
bool subproblem_feasible(const TrajectorySubproblem& sp, const Point3& p, const ScenarioConfig& scn,
                         double tol = 1e-10);

struct PlanResult {
  std::vector<UavState> uavs;
  /// UAVs that held position because their solve failed.
  std::vector<int> fallbacks;
  /// Solver objective per UAV (NaN on fallback).
  std::vector<double> objectives;
  std::vector<int> order;
};

/// Sequential planning in index order (rotated by `slot` when enabled); vehicles
/// covered by an earlier UAV are masked from later subproblems.
PlanResult plan_all_trajectories(const std::vector<UavState>& uavs, const std::vector<VehicleState>& vehicles,
                                 const ScenarioConfig& scn, const TrajectoryConfig& cfg, int slot = 0,
                                 const ConicBackend& backend = default_backend());

/// R_t = covered vehicles - omega_h * sum of altitudes - omega_e * flight energy.
double coverage_metric(const std::vector<UavState>& uavs, const std::vector<VehicleState>& vehicles,
                       double flight_energy_j, const ScenarioConfig& scn, const TrajectoryConfig& cfg);

int covered_vehicle_count(const std::vector<UavState>& uavs, const std::vector<VehicleState>& vehicles,
                          double theta_max_rad);

}  // namespace uavmec
