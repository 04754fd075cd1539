#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace uavmec {

using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kGravity = 9.81;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Tolerance applied to every inclusive geometric comparison.
inline constexpr double kBoundaryTol = 1e-9;
inline constexpr double kBitsPerMb = 1e6;

/// Raised when a configuration or problem description violates its invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for arguments outside a formula's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a geometric construction has no defined answer (e.g. coincident points).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double k, Point2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
  double norm() const { return std::hypot(x, y); }
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point2 horizontal() const { return {x, y}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double horizontal_distance(Point2 a, Point2 b) { return (a - b).norm(); }
inline double distance3(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Truncated Gaussian by rejection; falls back to clamping after a bounded number of draws.
double sample_truncated_normal(Rng& rng, double mean, double stddev, double lo, double hi);

/// Stable 64-bit FNV-1a hash, used for config fingerprints in checkpoints.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace uavmec
