#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "uavmec/common.hpp"

namespace uavmec {

struct Box3 {
  double x_min = 0.0, x_max = 300.0;
  double y_min = 0.0, y_max = 300.0;
  double z_min = 50.0, z_max = 100.0;

  bool contains(const Point3& p, double tol = kBoundaryTol) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol &&
           p.z >= z_min - tol && p.z <= z_max + tol;
  }
};

struct ScenarioConfig {
  double area_size_m = 300.0;
  int num_vehicles = 50;
  int num_uavs = 5;
  double slot_duration_s = 1.0;
  double speed_mean_mps = 12.5;
  double speed_std_mps = 1.5;
  double speed_min_mps = 10.0;
  double speed_max_mps = 15.0;
  Box3 uav_bounds{};
  double l_max_h_m = 15.0;
  double l_max_v_m = 10.0;
  /// Speed cap implied by the per-slot displacement limits unless set explicitly.
  double v_max_mps = 18.027756377319946;
  double d_min_m = 20.0;
  double theta_max_rad = 0.7407324441101257;  // 42.44 degrees
  double sensing_range_m = 70.0;
  Point3 bs_position{150.0, 150.0, 25.0};
  double antenna_height_m = 1.5;
  int lanes_per_axis = 4;
  /// Weights of the serving-UAV cost (load term, path-loss term).
  double lambda_load = 0.5;
  double lambda_pathloss = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class Axis { horizontal, vertical };

/// A full-length, one-way, axis-aligned lane. `offset` is the fixed coordinate
/// (y for horizontal lanes, x for vertical ones); `direction` is +1 or -1.
struct Lane {
  int id = 0;
  Axis axis = Axis::horizontal;
  double offset = 0.0;
  int direction = 1;
};

struct Intersection {
  Point2 point;
  /// Lanes meeting here; a vehicle arriving on either may continue or switch.
  std::vector<int> lanes;
};

class RoadNetwork {
 public:
  /// `lanes_per_axis` horizontal and vertical lanes, uniformly spaced, directions alternating.
  static RoadNetwork grid(double area_size_m, int lanes_per_axis);

  double area_size() const { return area_; }
  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::vector<Intersection>& intersections() const { return intersections_; }

  Point2 position_on(int lane, double along) const;
  Point2 heading_of(int lane) const;
  /// Lane coordinates of the next intersection strictly ahead of `along`, if any before the boundary.
  std::optional<double> next_intersection(int lane, double along) const;
  /// Index into intersections() for the crossing of `lane` at coordinate `along`.
  int intersection_at(int lane, double along) const;
  /// Id of the lane whose centreline contains `p` (within tolerance); -1 if none.
  std::vector<int> lanes_through(Point2 p, double tol = 1e-6) const;

 private:
  double area_ = 0.0;
  int per_axis_ = 0;
  std::vector<Lane> lanes_;
  std::vector<Intersection> intersections_;
};

struct VehicleState {
  int id = 0;
  int lane = 0;
  /// Coordinate along the lane axis, in [0, area).
  double along = 0.0;
  Point2 position;
  double speed_mps = 0.0;
  Point2 heading;
  double task_bits = 0.0;
  double shadow_db = 0.0;
  double deadline_s = 1.0;
};

struct UavState {
  int id = 0;
  Point3 position;
  Point3 prev_position;
  std::vector<int> served_vehicles;
  double compute_hz = 5e9;
};

struct Scenario {
  RoadNetwork roads;
  std::vector<VehicleState> vehicles;
  std::vector<UavState> uavs;
};

/// Vehicles uniform over the lanes, speeds from the truncated Gaussian, UAVs on a
/// centred regular polygon at minimum altitude (random placement if the polygon
/// violates the separation). Throws ConfigError when the UAVs cannot be separated.
Scenario init_scenario(const ScenarioConfig& cfg, double uav_compute_hz = 5e9);

/// Advance every vehicle by speed*dt, turning uniformly at intersections and
/// wrapping to the opposite end of the lane at the boundary.
std::vector<VehicleState> step_vehicles(const RoadNetwork& net, std::vector<VehicleState> vehicles,
                                        double dt, Rng& rng);

double coverage_radius(double altitude_m, double theta_max_rad);
bool coverage_indicator(const UavState& uav, const VehicleState& vehicle, double theta_max_rad);

enum class MotionViolation { bounds, horizontal, vertical, speed };
std::string_view to_string(MotionViolation v);

/// First violated motion constraint, or nullopt if the move is admissible.
std::optional<MotionViolation> validate_uav_motion(const Point3& prev, const Point3& next,
                                                   const ScenarioConfig& cfg);

struct ServingCandidate {
  int uav_id = 0;
  /// Total task load (bits) of all vehicles inside this UAV's coverage.
  double load_bits = 0.0;
  int covered_count = 0;
  double pathloss_db = 0.0;
};

/// argmin over covering UAVs of lambda_load * D_u + lambda_pathloss * C_m^u with
/// D_u normalised by (max task size * covered count) and C by 120 dB; ties go to
/// the lower UAV id.
std::optional<int> select_serving_uav(const std::vector<ServingCandidate>& candidates,
                                      double lambda_load, double lambda_pathloss,
                                      double max_task_bits = 2e6);

}  // namespace uavmec
