#include "uavmec/common.hpp"

#include <algorithm>

namespace uavmec {

double sample_truncated_normal(Rng& rng, double mean, double stddev, double lo, double hi) {
  if (lo > hi) throw DomainError("truncated normal: lo > hi");
  if (stddev <= 0.0 || lo == hi) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> dist(mean, stddev);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double v = dist(rng);
    if (v >= lo && v <= hi) return v;
  }
  return std::clamp(mean, lo, hi);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace uavmec
