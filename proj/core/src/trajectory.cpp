#include "uavmec/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace uavmec {

void TrajectoryConfig::validate() const {
  if (beta_coverage < 0.0 || beta_penalty < 0.0 || beta_altitude < 0.0 || w_eng < 0.0)
    throw ConfigError("trajectory: weights must be >= 0");
  if (c_xy < 0.0 || c_down < 0.0 || c_up < c_down) throw ConfigError("trajectory: need c_xy >= 0 and c_up >= c_down >= 0");
  if (!(r_min < 0.0)) throw ConfigError("trajectory.r_min must be negative");
  if (n_max_m < 0.0) throw ConfigError("trajectory.n_max_m must be >= 0");
}

HalfPlane tangent_halfplane(Point2 self, Point2 other, double d_min) {
  const Point2 diff = other - self;
  const double len = diff.norm();
  if (!(len > 0.0)) throw GeometryError("tangent_halfplane: coincident UAV positions");
  const Point2 n{diff.x / len, diff.y / len};
  const Point2 q = other - d_min * n;
  return {n.x, n.y, -(n.x * q.x + n.y * q.y)};
}

double convex_energy_cost(const Point3& p, const Point3& prev, const TrajectoryConfig& cfg) {
  const double dx = p.x - prev.x, dy = p.y - prev.y, dz = p.z - prev.z;
  return cfg.w_eng * (cfg.c_xy * (dx * dx + dy * dy) + cfg.c_up * std::max(dz, 0.0) + cfg.c_down * std::max(-dz, 0.0));
}

namespace {

double speed_limit_m(const ScenarioConfig& scn) { return scn.v_max_mps * scn.slot_duration_s; }

bool speed_cone_needed(const ScenarioConfig& scn) {
  return speed_limit_m(scn) < std::hypot(scn.l_max_h_m, scn.l_max_v_m) * (1.0 - 1e-12);
}

}  // namespace

TrajectorySubproblem build_uav_subproblem(const UavState& uav, const std::vector<LocalVehicle>& vehicles,
                                          const std::vector<HalfPlane>& halfplanes, const ScenarioConfig& scn,
                                          const TrajectoryConfig& cfg) {
  using TS = TrajectorySubproblem;
  TS sp;
  sp.vehicles = vehicles;
  sp.halfplanes = halfplanes;
  sp.prev = uav.position;
  sp.tan_theta = std::tan(scn.theta_max_rad);
  const Box3& box = scn.uav_bounds;
  const Point3& p0 = uav.position;
  sp.x_lo = std::max(box.x_min, p0.x - scn.l_max_h_m);
  sp.x_hi = std::min(box.x_max, p0.x + scn.l_max_h_m);
  sp.y_lo = std::max(box.y_min, p0.y - scn.l_max_h_m);
  sp.y_hi = std::min(box.y_max, p0.y + scn.l_max_h_m);
  sp.z_lo = std::max(box.z_min, p0.z - scn.l_max_v_m);
  sp.z_hi = std::min(box.z_max, p0.z + scn.l_max_v_m);
  // A previous position marginally outside the box must stay admissible.
  sp.x_lo = std::min(sp.x_lo, p0.x);
  sp.x_hi = std::max(sp.x_hi, p0.x);
  sp.y_lo = std::min(sp.y_lo, p0.y);
  sp.y_hi = std::max(sp.y_hi, p0.y);
  sp.z_lo = std::min(sp.z_lo, p0.z);
  sp.z_hi = std::max(sp.z_hi, p0.z);

  const int nv = static_cast<int>(vehicles.size());
  const int n = TS::kFirstVehicle + 3 * nv;
  ConeProgram& cp = sp.program;
  LinearProgram& lp = cp.core;
  lp.c = Eigen::VectorXd::Zero(n);
  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  lp.lower[TS::kX] = sp.x_lo;
  lp.upper[TS::kX] = sp.x_hi;
  lp.lower[TS::kY] = sp.y_lo;
  lp.upper[TS::kY] = sp.y_hi;
  lp.lower[TS::kZ] = sp.z_lo;
  lp.upper[TS::kZ] = sp.z_hi;
  lp.upper[TS::kClimb] = sp.z_hi - p0.z;
  lp.upper[TS::kDescent] = p0.z - sp.z_lo;

  // Energy: w (c_xy |p - p0|^2 + c_up climb + c_down descent) with climb >= dz, descent >= -dz.
  const double qxy = cfg.w_eng * cfg.c_xy;
  cp.Q = Eigen::MatrixXd::Zero(n, n);
  cp.Q(TS::kX, TS::kX) = qxy;
  cp.Q(TS::kY, TS::kY) = qxy;
  lp.c[TS::kX] = -2.0 * qxy * p0.x;
  lp.c[TS::kY] = -2.0 * qxy * p0.y;
  lp.objective_offset = qxy * (p0.x * p0.x + p0.y * p0.y);
  lp.c[TS::kZ] = cfg.beta_altitude;
  lp.c[TS::kClimb] = cfg.w_eng * cfg.c_up;
  lp.c[TS::kDescent] = cfg.w_eng * cfg.c_down;

  const int rows = 2 + nv + static_cast<int>(halfplanes.size());
  lp.A_ineq = Eigen::MatrixXd::Zero(rows, n);
  lp.b_ineq = Eigen::VectorXd::Zero(rows);
  int row = 0;
  lp.A_ineq(row, TS::kZ) = 1.0;  // z - climb <= z0
  lp.A_ineq(row, TS::kClimb) = -1.0;
  lp.b_ineq[row++] = p0.z;
  lp.A_ineq(row, TS::kZ) = -1.0;  // -z - descent <= -z0
  lp.A_ineq(row, TS::kDescent) = -1.0;
  lp.b_ineq[row++] = -p0.z;

  const double reach_floor = sp.z_lo * sp.tan_theta;
  sp.m_linear.resize(static_cast<std::size_t>(nv));
  for (int j = 0; j < nv; ++j) {
    const LocalVehicle& v = vehicles[static_cast<std::size_t>(j)];
    const int is = TS::s_index(j), ir = TS::r_index(j), in = TS::n_index(j);
    lp.upper[is] = 1.0;
    lp.lower[ir] = cfg.r_min;
    lp.upper[ir] = 0.0;
    lp.upper[in] = cfg.n_max_m;
    lp.c[ir] = cfg.beta_coverage;
    lp.c[in] = cfg.beta_penalty;

    // Smallest M that leaves the coverage row slack at s = 0 anywhere in the move disk.
    const double mj = std::max(1.0, horizontal_distance(v.position, p0.horizontal()) + scn.l_max_h_m - reach_floor);
    sp.m_linear[static_cast<std::size_t>(j)] = mj;

    // s (2D)^2 >= -r
    const double w = 4.0 * v.load_mb * v.load_mb;
    lp.A_ineq(row, is) = -w;
    lp.A_ineq(row, ir) = -1.0;
    lp.b_ineq[row++] = 0.0;

    // ||p_j - p|| <= tan(theta) z + M (1 - s) + N
    SecondOrderCone q;
    q.A = Eigen::MatrixXd::Zero(2, n);
    q.A(0, TS::kX) = -1.0;
    q.A(1, TS::kY) = -1.0;
    q.b = Eigen::Vector2d(v.position.x, v.position.y);
    q.c = Eigen::VectorXd::Zero(n);
    q.c[TS::kZ] = sp.tan_theta;
    q.c[is] = -mj;
    q.c[in] = 1.0;
    q.d = mj;
    cp.cones.push_back(std::move(q));
  }
  for (const HalfPlane& h : halfplanes) {
    lp.A_ineq(row, TS::kX) = h.a;
    lp.A_ineq(row, TS::kY) = h.b;
    lp.b_ineq[row++] = -h.c;
  }

  SecondOrderCone move;
  move.A = Eigen::MatrixXd::Zero(2, n);
  move.A(0, TS::kX) = 1.0;
  move.A(1, TS::kY) = 1.0;
  move.b = Eigen::Vector2d(-p0.x, -p0.y);
  move.c = Eigen::VectorXd::Zero(n);
  move.d = scn.l_max_h_m;
  cp.cones.push_back(std::move(move));

  if (speed_cone_needed(scn)) {
    SecondOrderCone sc;
    sc.A = Eigen::MatrixXd::Zero(3, n);
    sc.A(0, TS::kX) = 1.0;
    sc.A(1, TS::kY) = 1.0;
    sc.A(2, TS::kZ) = 1.0;
    sc.b = Eigen::Vector3d(-p0.x, -p0.y, -p0.z);
    sc.c = Eigen::VectorXd::Zero(n);
    sc.d = speed_limit_m(scn);
    cp.cones.push_back(std::move(sc));
  }
  return sp;
}

bool subproblem_feasible(const TrajectorySubproblem& sp, const Point3& p, const ScenarioConfig& scn, double tol) {
  if (p.x < sp.x_lo - tol || p.x > sp.x_hi + tol || p.y < sp.y_lo - tol || p.y > sp.y_hi + tol ||
      p.z < sp.z_lo - tol || p.z > sp.z_hi + tol)
    return false;
  if (horizontal_distance(p.horizontal(), sp.prev.horizontal()) > scn.l_max_h_m + tol) return false;
  if (std::abs(p.z - sp.prev.z) > scn.l_max_v_m + tol) return false;
  if (distance3(p, sp.prev) > speed_limit_m(scn) + tol) return false;
  for (const HalfPlane& h : sp.halfplanes)
    if (h.eval(p.horizontal()) > tol) return false;
  return true;
}

namespace {

// Clamp a solver point into the box, then pull it back toward the previous
// position (always admissible) until every constraint holds.
std::optional<Point3> repair(const TrajectorySubproblem& sp, Point3 p, const ScenarioConfig& scn) {
  p.x = std::clamp(p.x, sp.x_lo, sp.x_hi);
  p.y = std::clamp(p.y, sp.y_lo, sp.y_hi);
  p.z = std::clamp(p.z, sp.z_lo, sp.z_hi);
  constexpr double tol = 1e-10;
  if (subproblem_feasible(sp, p, scn, tol)) return p;
  if (!subproblem_feasible(sp, sp.prev, scn, tol)) return std::nullopt;
  auto at = [&](double t) {
    return Point3{sp.prev.x + t * (p.x - sp.prev.x), sp.prev.y + t * (p.y - sp.prev.y),
                  sp.prev.z + t * (p.z - sp.prev.z)};
  };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (subproblem_feasible(sp, at(mid), scn, tol) ? lo : hi) = mid;
  }
  return at(lo);
}

}  // namespace

PlanResult plan_all_trajectories(const std::vector<UavState>& uavs, const std::vector<VehicleState>& vehicles,
                                 const ScenarioConfig& scn, const TrajectoryConfig& cfg, int slot,
                                 const ConicBackend& backend) {
  const int U = static_cast<int>(uavs.size());
  PlanResult out;
  out.uavs = uavs;
  out.objectives.assign(static_cast<std::size_t>(U), std::numeric_limits<double>::quiet_NaN());
  out.order.resize(static_cast<std::size_t>(U));
  std::iota(out.order.begin(), out.order.end(), 0);
  if (cfg.rotate_order && U > 0)
    std::rotate(out.order.begin(), out.order.begin() + (((slot % U) + U) % U), out.order.end());

  std::vector<bool> masked(vehicles.size(), false);
  std::vector<bool> placed(static_cast<std::size_t>(U), false);
  for (int i : out.order) {
    UavState& u = out.uavs[static_cast<std::size_t>(i)];
    u.prev_position = uavs[static_cast<std::size_t>(i)].position;
    const Point2 self = u.prev_position.horizontal();

    std::vector<HalfPlane> planes;
    for (int k = 0; k < U; ++k) {
      if (k == i) continue;
      const Point3& other = placed[static_cast<std::size_t>(k)] ? out.uavs[static_cast<std::size_t>(k)].position
                                                                 : uavs[static_cast<std::size_t>(k)].position;
      planes.push_back(tangent_halfplane(self, other.horizontal(), scn.d_min_m));
    }

    std::vector<LocalVehicle> local;
    for (std::size_t m = 0; m < vehicles.size(); ++m) {
      const VehicleState& v = vehicles[m];
      if (masked[m] || v.task_bits <= 0.0) continue;
      if (horizontal_distance(v.position, self) > scn.sensing_range_m) continue;
      local.push_back({v.id, v.position, v.task_bits / kBitsPerMb});
    }

    const TrajectorySubproblem sp = build_uav_subproblem(uavs[static_cast<std::size_t>(i)], local, planes, scn, cfg);
    std::optional<Point3> next;
    SolveResult r;
    try {
      r = solve_socp(sp.program, SolverOptions{}, backend);
    } catch (const std::exception& e) {
      std::clog << "[trajectory] uav " << i << ": " << e.what() << '\n';
    }
    if (r.optimal()) {
      next = repair(sp, {r.x[TrajectorySubproblem::kX], r.x[TrajectorySubproblem::kY], r.x[TrajectorySubproblem::kZ]},
                    scn);
      out.objectives[static_cast<std::size_t>(i)] = r.objective;
    }
    if (!next) {
      std::clog << "[trajectory] uav " << i << " holds position (solver status " << to_string(r.status) << ")\n";
      out.fallbacks.push_back(i);
      next = u.prev_position;
    }
    u.position = *next;
    placed[static_cast<std::size_t>(i)] = true;

    u.served_vehicles.clear();
    for (std::size_t m = 0; m < vehicles.size(); ++m) {
      if (masked[m] || !coverage_indicator(u, vehicles[m], scn.theta_max_rad)) continue;
      masked[m] = true;
      u.served_vehicles.push_back(vehicles[m].id);
    }
  }
  return out;
}

int covered_vehicle_count(const std::vector<UavState>& uavs, const std::vector<VehicleState>& vehicles,
                          double theta_max_rad) {
  int count = 0;
  for (const VehicleState& v : vehicles)
    for (const UavState& u : uavs)
      if (coverage_indicator(u, v, theta_max_rad)) {
        ++count;
        break;
      }
  return count;
}

double coverage_metric(const std::vector<UavState>& uavs, const std::vector<VehicleState>& vehicles,
                       double flight_energy_j, const ScenarioConfig& scn, const TrajectoryConfig& cfg) {
  double heights = 0.0;
  for (const UavState& u : uavs) heights += u.position.z;
  return covered_vehicle_count(uavs, vehicles, scn.theta_max_rad) - cfg.omega_h * heights - cfg.omega_e * flight_energy_j;
}

}  // namespace uavmec
