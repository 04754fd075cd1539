#pragma once

#include <vector>

#include "uavmec/common.hpp"

namespace uavmec {

struct ChannelConfig {
  double carrier_hz = 2.4e9;
  double rb_bandwidth_hz = 180e3;
  double total_bandwidth_hz = 10e6;
  double omega_a = 9.61;
  double omega_b = 0.16;
  double eta_los_db = 1.0;
  double eta_nlos_db = 20.0;
  double decorrelation_m = 25.0;
  double shadow_std_db = 4.0;
  double rician_k_db = 6.0;
  double noise_dbm_per_hz = -174.0;
  double noise_figure_db = 9.0;
  double tx_gain_db = 3.0;
  double rx_gain_bs_db = 8.0;
  double rx_gain_uav_db = 5.0;
  double p_min_dbm = 5.0;
  double p_max_dbm = 23.0;

  int total_rbs() const;
  double rician_k_linear() const { return db_to_linear(rician_k_db); }
  void validate() const;
};

struct LinkBudget {
  double pathloss_db = 0.0;
  double shadow_db = 0.0;
  double fast_fading_db = 0.0;
  double rx_power_dbm = 0.0;
  double noise_dbm = 0.0;
  double snr_linear = 0.0;
};

/// 128.1 + 37.6 log10(d / 1 km).
double v2i_pathloss_db(double distance_m);

/// AR(1) shadowing with an explicit standard-normal innovation.
double shadow_ar1(double prev_db, double delta_d_m, double decorrelation_m, double sigma_db, double unit_normal);
double update_shadow(double prev_db, double delta_d_m, const ChannelConfig& cfg, Rng& rng);

/// |h|^2 with h ~ CN(0, 1).
double rayleigh_power_gain(Rng& rng);
double rayleigh_fast_fading_db(Rng& rng);
/// |h|^2 for a Rician channel with linear K factor, normalised to unit mean power.
double rician_power_gain(double k_linear, Rng& rng);
double rician_fading_db(double k_linear, Rng& rng);

/// Logistic LoS probability with the elevation angle given in degrees.
double los_probability_deg(double elevation_deg, const ChannelConfig& cfg);
/// Elevation from the height difference `dz_m` over slant distance `slant_m`.
double los_probability(double dz_m, double slant_m, const ChannelConfig& cfg);
double free_space_loss_db(double distance_m, double carrier_hz);
double g2a_mean_pathloss_db(double slant_m, double dz_m, const ChannelConfig& cfg);

/// Thermal noise over `rb_count` resource blocks, in dBm.
double noise_dbm(int rb_count, const ChannelConfig& cfg);
/// Mean linear gain of the chosen RBs, in dB. Empty selection gives 0 dB.
double effective_fading_db(const std::vector<double>& per_rb_linear_gain, const std::vector<int>& rbs);

LinkBudget v2i_budget(int rb_count, double tx_power_dbm, double pathloss_db, double shadow_db, double fading_db,
                      const ChannelConfig& cfg);
LinkBudget g2a_budget(int rb_count, double tx_power_dbm, double mean_pathloss_db, double fading_db,
                      const ChannelConfig& cfg);

/// rb_count * rb_bandwidth * log2(1 + snr).
double shannon_rate_bps(int rb_count, double snr_linear, const ChannelConfig& cfg);
double v2i_rate_bps(int rb_count, double tx_power_dbm, double pathloss_db, double shadow_db, double fading_db,
                    const ChannelConfig& cfg);
double g2a_rate_bps(int rb_count, double tx_power_dbm, double mean_pathloss_db, double fading_db,
                    const ChannelConfig& cfg);

}  // namespace uavmec
