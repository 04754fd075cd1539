#include "uavmec/channel.hpp"

#include <algorithm>
#include <cmath>

namespace uavmec {

int ChannelConfig::total_rbs() const {
  return static_cast<int>(std::floor(total_bandwidth_hz / rb_bandwidth_hz + 1e-9));
}

void ChannelConfig::validate() const {
  if (!(rb_bandwidth_hz > 0.0)) throw ConfigError("channel.rb_bandwidth_hz must be positive");
  if (total_bandwidth_hz < rb_bandwidth_hz) throw ConfigError("channel.total_bandwidth_hz < rb_bandwidth_hz");
  if (!(omega_a > 0.0 && omega_b > 0.0)) throw ConfigError("channel.omega_a/omega_b must be positive");
  if (eta_nlos_db < eta_los_db) throw ConfigError("channel.eta_nlos_db < eta_los_db");
  if (p_min_dbm > p_max_dbm) throw ConfigError("channel.p_min_dbm > p_max_dbm");
  if (!(carrier_hz > 0.0)) throw ConfigError("channel.carrier_hz must be positive");
  if (!(decorrelation_m > 0.0)) throw ConfigError("channel.decorrelation_m must be positive");
  if (shadow_std_db < 0.0) throw ConfigError("channel.shadow_std_db must be >= 0");
}

double v2i_pathloss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("v2i_pathloss_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

double shadow_ar1(double prev_db, double delta_d_m, double decorrelation_m, double sigma_db, double unit_normal) {
  if (delta_d_m < 0.0) throw DomainError("shadow update: negative displacement");
  const double rho = std::exp(-delta_d_m / decorrelation_m);
  return rho * prev_db + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * sigma_db * unit_normal;
}

double update_shadow(double prev_db, double delta_d_m, const ChannelConfig& cfg, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return shadow_ar1(prev_db, delta_d_m, cfg.decorrelation_m, cfg.shadow_std_db, n01(rng));
}

double rayleigh_power_gain(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng), im = n(rng);
  return re * re + im * im;
}

double rayleigh_fast_fading_db(Rng& rng) { return linear_to_db(std::max(rayleigh_power_gain(rng), 1e-300)); }

double rician_power_gain(double k_linear, Rng& rng) {
  if (k_linear < 0.0) throw DomainError("rician fading: negative K");
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double los = std::sqrt(k_linear / (k_linear + 1.0));
  const double nlos = std::sqrt(1.0 / (k_linear + 1.0));
  const double th = phase(rng);
  const double re = los * std::cos(th) + nlos * n(rng);
  const double im = los * std::sin(th) + nlos * n(rng);
  return re * re + im * im;
}

double rician_fading_db(double k_linear, Rng& rng) {
  if (std::isinf(k_linear)) return 0.0;
  return linear_to_db(std::max(rician_power_gain(k_linear, rng), 1e-300));
}

double los_probability_deg(double elevation_deg, const ChannelConfig& cfg) {
  return 1.0 / (1.0 + cfg.omega_a * std::exp(-cfg.omega_b * (elevation_deg - cfg.omega_a)));
}

double los_probability(double dz_m, double slant_m, const ChannelConfig& cfg) {
  if (!(dz_m > 0.0)) throw DomainError("los_probability: height difference must be positive");
  if (dz_m > slant_m * (1.0 + 1e-12)) throw DomainError("los_probability: height exceeds slant distance");
  const double ratio = std::min(1.0, dz_m / slant_m);
  return los_probability_deg(rad_to_deg(std::asin(ratio)), cfg);
}

double free_space_loss_db(double distance_m, double carrier_hz) {
  if (!(distance_m > 0.0)) throw DomainError("free_space_loss_db: distance must be positive");
  return 20.0 * std::log10(4.0 * kPi * distance_m * carrier_hz / kSpeedOfLight);
}

double g2a_mean_pathloss_db(double slant_m, double dz_m, const ChannelConfig& cfg) {
  const double p_los = los_probability(dz_m, slant_m, cfg);
  return free_space_loss_db(slant_m, cfg.carrier_hz) + p_los * (cfg.eta_los_db - cfg.eta_nlos_db) + cfg.eta_nlos_db;
}

double noise_dbm(int rb_count, const ChannelConfig& cfg) {
  if (rb_count <= 0) return -kInf;
  return cfg.noise_dbm_per_hz + cfg.noise_figure_db + 10.0 * std::log10(rb_count * cfg.rb_bandwidth_hz);
}

double effective_fading_db(const std::vector<double>& per_rb_linear_gain, const std::vector<int>& rbs) {
  if (rbs.empty()) return 0.0;
  double sum = 0.0;
  for (int r : rbs) sum += per_rb_linear_gain.at(static_cast<std::size_t>(r));
  return linear_to_db(std::max(sum / static_cast<double>(rbs.size()), 1e-300));
}

namespace {

LinkBudget finish_budget(int rb_count, double rx_dbm, const ChannelConfig& cfg) {
  LinkBudget b;
  b.rx_power_dbm = rx_dbm;
  b.noise_dbm = noise_dbm(rb_count, cfg);
  b.snr_linear = rb_count > 0 ? dbm_to_watt(rx_dbm) / dbm_to_watt(b.noise_dbm) : 0.0;
  return b;
}

}  // namespace

LinkBudget v2i_budget(int rb_count, double tx_power_dbm, double pathloss_db, double shadow_db, double fading_db,
                      const ChannelConfig& cfg) {
  const double rx = tx_power_dbm - pathloss_db + shadow_db + fading_db + cfg.tx_gain_db + cfg.rx_gain_bs_db;
  LinkBudget b = finish_budget(rb_count, rx, cfg);
  b.pathloss_db = pathloss_db;
  b.shadow_db = shadow_db;
  b.fast_fading_db = fading_db;
  return b;
}

LinkBudget g2a_budget(int rb_count, double tx_power_dbm, double mean_pathloss_db, double fading_db,
                      const ChannelConfig& cfg) {
  const double rx = tx_power_dbm - mean_pathloss_db + fading_db + cfg.tx_gain_db + cfg.rx_gain_uav_db;
  LinkBudget b = finish_budget(rb_count, rx, cfg);
  b.pathloss_db = mean_pathloss_db;
  b.fast_fading_db = fading_db;
  return b;
}

double shannon_rate_bps(int rb_count, double snr_linear, const ChannelConfig& cfg) {
  if (rb_count <= 0) return 0.0;
  return rb_count * cfg.rb_bandwidth_hz * std::log2(1.0 + std::max(0.0, snr_linear));
}

double v2i_rate_bps(int rb_count, double tx_power_dbm, double pathloss_db, double shadow_db, double fading_db,
                    const ChannelConfig& cfg) {
  return shannon_rate_bps(rb_count, v2i_budget(rb_count, tx_power_dbm, pathloss_db, shadow_db, fading_db, cfg).snr_linear,
                          cfg);
}

double g2a_rate_bps(int rb_count, double tx_power_dbm, double mean_pathloss_db, double fading_db,
                    const ChannelConfig& cfg) {
  return shannon_rate_bps(rb_count, g2a_budget(rb_count, tx_power_dbm, mean_pathloss_db, fading_db, cfg).snr_linear, cfg);
}

}  // namespace uavmec
