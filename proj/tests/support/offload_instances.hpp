#pragma once

#include <random>
#include <vector>

#include "uavmec/offload_lp.hpp"

namespace gen {

/// Random offloading instance with up to `max_vehicles` vehicles and two UAVs.
/// Loads are drawn from {0.5, 1, 2} Mb, rates from 1 to 20 Mbps, queue estimates
/// from [0, 0.3] s; some vehicles lack UAV coverage.
inline std::vector<uavmec::OffloadVehicle> random_offload(std::mt19937_64& rng, int max_vehicles,
                                                          uavmec::OffloadParams& params) {
  std::uniform_int_distribution<int> count(1, max_vehicles), level(0, 2), uav(0, 1);
  std::uniform_real_distribution<double> rate(1e6, 20e6), q(0.0, 0.3), pw(5.0, 23.0);
  std::bernoulli_distribution covered(0.7), queued(0.5);
  params.uav_hz = {5e9, 5e9};
  const double levels[] = {0.5e6, 1e6, 2e6};
  std::vector<uavmec::OffloadVehicle> vs;
  const int M = count(rng);
  for (int m = 0; m < M; ++m) {
    uavmec::OffloadVehicle v;
    v.id = m;
    v.task_bits = levels[level(rng)];
    v.rate_v2i_bps = rate(rng);
    v.power_v2i_dbm = pw(rng);
    if (covered(rng)) {
      v.serving_uav = uav(rng);
      v.rate_v2u_bps = rate(rng);
      v.power_v2u_dbm = pw(rng);
      v.queue_uav_s = queued(rng) ? q(rng) : 0.0;
    }
    v.queue_bs_s = queued(rng) ? q(rng) : 0.0;
    vs.push_back(v);
  }
  return vs;
}

}  // namespace gen
