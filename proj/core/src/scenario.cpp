#include "uavmec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavmec {

void ScenarioConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  const double vals[] = {area_size_m,    slot_duration_s, speed_mean_mps,    speed_std_mps,
                         speed_min_mps,  speed_max_mps,   uav_bounds.x_min,  uav_bounds.x_max,
                         uav_bounds.y_min, uav_bounds.y_max, uav_bounds.z_min, uav_bounds.z_max,
                         l_max_h_m,      l_max_v_m,       v_max_mps,         d_min_m,
                         theta_max_rad,  sensing_range_m, bs_position.x,     bs_position.y,
                         bs_position.z,  antenna_height_m, lambda_load,      lambda_pathloss};
  for (double v : vals)
    if (!finite(v)) throw ConfigError("scenario: non-finite parameter");
  if (area_size_m <= 0.0) throw ConfigError("scenario.area_size_m must be positive");
  if (num_vehicles < 0) throw ConfigError("scenario.num_vehicles must be >= 0");
  if (num_uavs < 0) throw ConfigError("scenario.num_uavs must be >= 0");
  if (slot_duration_s <= 0.0) throw ConfigError("scenario.slot_duration_s must be positive");
  if (uav_bounds.x_min > uav_bounds.x_max) throw ConfigError("scenario.uav_bounds: x_min > x_max");
  if (uav_bounds.y_min > uav_bounds.y_max) throw ConfigError("scenario.uav_bounds: y_min > y_max");
  if (uav_bounds.z_min > uav_bounds.z_max) throw ConfigError("scenario.uav_bounds: z_min > z_max");
  if (uav_bounds.z_min <= 0.0) throw ConfigError("scenario.uav_bounds: z_min must be positive");
  if (d_min_m <= 0.0) throw ConfigError("scenario.d_min_m must be positive");
  if (!(theta_max_rad > 0.0 && theta_max_rad < kPi / 2.0))
    throw ConfigError("scenario.theta_max_rad must lie in (0, pi/2)");
  if (!(speed_min_mps <= speed_mean_mps && speed_mean_mps <= speed_max_mps))
    throw ConfigError("scenario: speed_min <= speed_mean <= speed_max violated");
  if (speed_min_mps < 0.0 || speed_std_mps < 0.0) throw ConfigError("scenario: negative speed parameter");
  if (l_max_h_m < 0.0 || l_max_v_m < 0.0 || v_max_mps < 0.0)
    throw ConfigError("scenario: negative motion limit");
  if (sensing_range_m < 0.0) throw ConfigError("scenario.sensing_range_m must be >= 0");
  if (lanes_per_axis < 1) throw ConfigError("scenario.lanes_per_axis must be >= 1");
  if (lambda_load < 0.0 || lambda_pathloss < 0.0) throw ConfigError("scenario: negative serving weight");
}

RoadNetwork RoadNetwork::grid(double area_size_m, int lanes_per_axis) {
  if (area_size_m <= 0.0 || lanes_per_axis < 1) throw ConfigError("road grid: bad dimensions");
  RoadNetwork net;
  net.area_ = area_size_m;
  net.per_axis_ = lanes_per_axis;
  const double spacing = area_size_m / lanes_per_axis;
  for (int axis = 0; axis < 2; ++axis) {
    for (int i = 0; i < lanes_per_axis; ++i) {
      Lane l;
      l.id = axis * lanes_per_axis + i;
      l.axis = axis == 0 ? Axis::horizontal : Axis::vertical;
      l.offset = (i + 0.5) * spacing;
      l.direction = (i % 2 == 0) ? 1 : -1;
      net.lanes_.push_back(l);
    }
  }
  for (int v = 0; v < lanes_per_axis; ++v) {
    for (int h = 0; h < lanes_per_axis; ++h) {
      Intersection x;
      x.point = {net.lanes_[lanes_per_axis + v].offset, net.lanes_[h].offset};
      x.lanes = {h, lanes_per_axis + v};
      net.intersections_.push_back(x);
    }
  }
  return net;
}

Point2 RoadNetwork::position_on(int lane, double along) const {
  const Lane& l = lanes_.at(lane);
  return l.axis == Axis::horizontal ? Point2{along, l.offset} : Point2{l.offset, along};
}

Point2 RoadNetwork::heading_of(int lane) const {
  const Lane& l = lanes_.at(lane);
  const double d = l.direction;
  return l.axis == Axis::horizontal ? Point2{d, 0.0} : Point2{0.0, d};
}

std::optional<double> RoadNetwork::next_intersection(int lane, double along) const {
  const Lane& l = lanes_.at(lane);
  // Crossing coordinates along this lane are the offsets of the other axis' lanes.
  const int first = l.axis == Axis::horizontal ? per_axis_ : 0;
  std::optional<double> best;
  double best_ahead = kInf;
  for (int i = 0; i < per_axis_; ++i) {
    const double c = lanes_[static_cast<std::size_t>(first + i)].offset;
    const double ahead = l.direction * (c - along);
    if (ahead > 1e-12 && ahead < best_ahead) {
      best_ahead = ahead;
      best = c;
    }
  }
  return best;
}

int RoadNetwork::intersection_at(int lane, double along) const {
  const Point2 p = position_on(lane, along);
  for (std::size_t i = 0; i < intersections_.size(); ++i)
    if (horizontal_distance(intersections_[i].point, p) < 1e-6) return static_cast<int>(i);
  return -1;
}

std::vector<int> RoadNetwork::lanes_through(Point2 p, double tol) const {
  std::vector<int> out;
  for (const Lane& l : lanes_) {
    const double fixed = l.axis == Axis::horizontal ? p.y : p.x;
    const double free = l.axis == Axis::horizontal ? p.x : p.y;
    if (std::abs(fixed - l.offset) <= tol && free >= -tol && free <= area_ + tol) out.push_back(l.id);
  }
  return out;
}

namespace {

std::vector<Point3> polygon_seeds(const ScenarioConfig& cfg) {
  const Box3& b = cfg.uav_bounds;
  const double cx = 0.5 * (b.x_min + b.x_max);
  const double cy = 0.5 * (b.y_min + b.y_max);
  const double radius = std::min({90.0, 0.5 * (b.x_max - b.x_min), 0.5 * (b.y_max - b.y_min)});
  std::vector<Point3> pts;
  const int n = cfg.num_uavs;
  for (int i = 0; i < n; ++i) {
    if (n == 1) {
      pts.push_back({cx, cy, b.z_min});
      break;
    }
    const double ang = kPi / 2.0 + 2.0 * kPi * i / n;
    pts.push_back({cx + radius * std::cos(ang), cy + radius * std::sin(ang), b.z_min});
  }
  return pts;
}

bool separated(const std::vector<Point3>& pts, double d_min) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (horizontal_distance(pts[i].horizontal(), pts[j].horizontal()) < d_min - kBoundaryTol) return false;
  return true;
}

}  // namespace

Scenario init_scenario(const ScenarioConfig& cfg, double uav_compute_hz) {
  cfg.validate();
  Scenario sc;
  sc.roads = RoadNetwork::grid(cfg.area_size_m, cfg.lanes_per_axis);
  Rng rng(cfg.seed);

  const int n_lanes = static_cast<int>(sc.roads.lanes().size());
  std::uniform_int_distribution<int> pick_lane(0, n_lanes - 1);
  std::uniform_real_distribution<double> pick_along(0.0, cfg.area_size_m);
  sc.vehicles.reserve(static_cast<std::size_t>(cfg.num_vehicles));
  for (int i = 0; i < cfg.num_vehicles; ++i) {
    VehicleState v;
    v.id = i;
    v.lane = pick_lane(rng);
    v.along = pick_along(rng);
    v.position = sc.roads.position_on(v.lane, v.along);
    v.heading = sc.roads.heading_of(v.lane);
    v.speed_mps = sample_truncated_normal(rng, cfg.speed_mean_mps, cfg.speed_std_mps, cfg.speed_min_mps,
                                          cfg.speed_max_mps);
    sc.vehicles.push_back(v);
  }

  std::vector<Point3> seeds = polygon_seeds(cfg);
  const Box3& b = cfg.uav_bounds;
  if (!separated(seeds, cfg.d_min_m) ||
      !std::all_of(seeds.begin(), seeds.end(), [&](const Point3& p) { return b.contains(p); })) {
    seeds.clear();
    std::uniform_real_distribution<double> ux(b.x_min, b.x_max), uy(b.y_min, b.y_max);
    for (int i = 0; i < cfg.num_uavs; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        Point3 p{ux(rng), uy(rng), b.z_min};
        seeds.push_back(p);
        if (separated(seeds, cfg.d_min_m)) {
          placed = true;
        } else {
          seeds.pop_back();
        }
      }
      if (!placed) throw ConfigError("cannot place UAVs with the required separation inside the bounds");
    }
  }
  for (int i = 0; i < cfg.num_uavs; ++i) {
    UavState u;
    u.id = i;
    u.position = seeds[static_cast<std::size_t>(i)];
    u.prev_position = u.position;
    u.compute_hz = uav_compute_hz;
    sc.uavs.push_back(u);
  }
  return sc;
}

std::vector<VehicleState> step_vehicles(const RoadNetwork& net, std::vector<VehicleState> vehicles, double dt,
                                        Rng& rng) {
  if (dt < 0.0) throw DomainError("step_vehicles: dt must be >= 0");
  const double area = net.area_size();
  std::bernoulli_distribution coin(0.5);
  for (VehicleState& v : vehicles) {
    double remaining = v.speed_mps * dt;
    while (remaining > 0.0) {
      const Lane& lane = net.lanes()[static_cast<std::size_t>(v.lane)];
      const int dir = lane.direction;
      const double to_boundary = dir > 0 ? area - v.along : v.along;
      const auto crossing = net.next_intersection(v.lane, v.along);
      const double to_crossing = crossing ? std::abs(*crossing - v.along) : kInf;
      if (to_crossing <= remaining && to_crossing <= to_boundary) {
        remaining -= to_crossing;
        v.along = *crossing;
        if (coin(rng)) {
          const Intersection& x = net.intersections()[static_cast<std::size_t>(net.intersection_at(v.lane, v.along))];
          const int other = x.lanes[0] == v.lane ? x.lanes[1] : x.lanes[0];
          v.along = lane.offset;
          v.lane = other;
        }
      } else if (to_boundary <= remaining) {
        remaining -= to_boundary;
        v.along = dir > 0 ? 0.0 : area;
      } else {
        v.along += dir * remaining;
        remaining = 0.0;
      }
    }
    v.position = net.position_on(v.lane, v.along);
    v.heading = net.heading_of(v.lane);
  }
  return vehicles;
}

double coverage_radius(double altitude_m, double theta_max_rad) {
  if (!(theta_max_rad >= 0.0 && theta_max_rad < kPi / 2.0)) throw DomainError("coverage_radius: theta outside [0, pi/2)");
  if (altitude_m < 0.0) throw DomainError("coverage_radius: negative altitude");
  return altitude_m * std::tan(theta_max_rad);
}

bool coverage_indicator(const UavState& uav, const VehicleState& vehicle, double theta_max_rad) {
  const double r = coverage_radius(uav.position.z, theta_max_rad);
  return horizontal_distance(uav.position.horizontal(), vehicle.position) <= r + kBoundaryTol;
}

std::string_view to_string(MotionViolation v) {
  switch (v) {
    case MotionViolation::bounds: return "bounds";
    case MotionViolation::horizontal: return "horizontal";
    case MotionViolation::vertical: return "vertical";
    case MotionViolation::speed: return "speed";
  }
  return "unknown";
}

std::optional<MotionViolation> validate_uav_motion(const Point3& prev, const Point3& next,
                                                   const ScenarioConfig& cfg) {
  if (!cfg.uav_bounds.contains(next)) return MotionViolation::bounds;
  if (horizontal_distance(prev.horizontal(), next.horizontal()) > cfg.l_max_h_m + kBoundaryTol)
    return MotionViolation::horizontal;
  if (std::abs(next.z - prev.z) > cfg.l_max_v_m + kBoundaryTol) return MotionViolation::vertical;
  if (distance3(prev, next) / cfg.slot_duration_s > cfg.v_max_mps + kBoundaryTol) return MotionViolation::speed;
  return std::nullopt;
}

std::optional<int> select_serving_uav(const std::vector<ServingCandidate>& candidates, double lambda_load,
                                      double lambda_pathloss, double max_task_bits) {
  std::optional<int> best;
  double best_cost = kInf;
  for (const ServingCandidate& c : candidates) {
    const double load = c.load_bits / (max_task_bits * std::max(1, c.covered_count));
    const double cost = lambda_load * load + lambda_pathloss * c.pathloss_db / 120.0;
    if (cost < best_cost || (cost == best_cost && best && c.uav_id < *best)) {
      best_cost = cost;
      best = c.uav_id;
    }
  }
  return best;
}

}  // namespace uavmec
