#include "uavmec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace uavmec {

std::string_view to_string(SchedulerMode m) {
  switch (m) {
    case SchedulerMode::off:
      return "off";
    case SchedulerMode::rule:
      return "rule";
    case SchedulerMode::llm:
      return "llm";
  }
  return "off";
}

std::string_view to_string(RunMode m) { return m == RunMode::train ? "train" : "eval"; }

SchedulerMode parse_scheduler_mode(const std::string& s) {
  if (s == "off") return SchedulerMode::off;
  if (s == "rule") return SchedulerMode::rule;
  if (s == "llm") return SchedulerMode::llm;
  throw ConfigError("scheduler mode must be off, rule or llm (got '" + s + "')");
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "train") return RunMode::train;
  if (s == "eval") return RunMode::eval;
  throw ConfigError("run mode must be train or eval (got '" + s + "')");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("'" + s + "' is not a valid number");
  return v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Per-type conversion between a field and its text form.
std::string show(double v) { return fmt(v); }
std::string show(int v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }
std::string show(SchedulerMode v) { return std::string(to_string(v)); }
std::string show(RunMode v) { return std::string(to_string(v)); }
std::string show(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}
std::string show(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void read(const std::string& s, double& v) { v = parse_number<double>(s); }
void read(const std::string& s, int& v) { v = parse_number<int>(s); }
void read(const std::string& s, std::uint64_t& v) { v = parse_number<std::uint64_t>(s); }
void read(const std::string& s, std::string& v) { v = s; }
void read(const std::string& s, SchedulerMode& v) { v = parse_scheduler_mode(s); }
void read(const std::string& s, RunMode& v) { v = parse_run_mode(s); }
void read(const std::string& s, bool& v) {
  if (s == "true" || s == "1") v = true;
  else if (s == "false" || s == "0") v = false;
  else throw ConfigError("'" + s + "' is not a boolean");
}
void read(const std::string& s, std::vector<double>& v) {
  v.clear();
  for (const std::string& x : split_list(s)) v.push_back(parse_number<double>(x));
}
void read(const std::string& s, std::vector<int>& v) {
  v.clear();
  for (const std::string& x : split_list(s)) v.push_back(parse_number<int>(x));
}

struct Field {
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, const std::string&)> set;
};

using Registry = std::map<std::string, Field>;

template <class Access>
void add(Registry& r, const std::string& name, Access access) {
  r[name] = Field{[access](const SimConfig& c) { return show(access(const_cast<SimConfig&>(c))); },
                  [access](SimConfig& c, const std::string& s) { read(s, access(c)); }};
}

#define UAVMEC_FIELD(reg, key, expr) add(reg, key, [](SimConfig& c) -> auto& { return c.expr; })

const Registry& registry() {
  static const Registry r = [] {
    Registry g;
    UAVMEC_FIELD(g, "scenario.area_size_m", scenario.area_size_m);
    UAVMEC_FIELD(g, "scenario.num_vehicles", scenario.num_vehicles);
    UAVMEC_FIELD(g, "scenario.num_uavs", scenario.num_uavs);
    UAVMEC_FIELD(g, "scenario.slot_duration_s", scenario.slot_duration_s);
    UAVMEC_FIELD(g, "scenario.speed_mean_mps", scenario.speed_mean_mps);
    UAVMEC_FIELD(g, "scenario.speed_std_mps", scenario.speed_std_mps);
    UAVMEC_FIELD(g, "scenario.speed_min_mps", scenario.speed_min_mps);
    UAVMEC_FIELD(g, "scenario.speed_max_mps", scenario.speed_max_mps);
    UAVMEC_FIELD(g, "scenario.x_min", scenario.uav_bounds.x_min);
    UAVMEC_FIELD(g, "scenario.x_max", scenario.uav_bounds.x_max);
    UAVMEC_FIELD(g, "scenario.y_min", scenario.uav_bounds.y_min);
    UAVMEC_FIELD(g, "scenario.y_max", scenario.uav_bounds.y_max);
    UAVMEC_FIELD(g, "scenario.z_min", scenario.uav_bounds.z_min);
    UAVMEC_FIELD(g, "scenario.z_max", scenario.uav_bounds.z_max);
    UAVMEC_FIELD(g, "scenario.l_max_h_m", scenario.l_max_h_m);
    UAVMEC_FIELD(g, "scenario.l_max_v_m", scenario.l_max_v_m);
    UAVMEC_FIELD(g, "scenario.v_max_mps", scenario.v_max_mps);
    UAVMEC_FIELD(g, "scenario.d_min_m", scenario.d_min_m);
    UAVMEC_FIELD(g, "scenario.theta_max_rad", scenario.theta_max_rad);
    UAVMEC_FIELD(g, "scenario.sensing_range_m", scenario.sensing_range_m);
    UAVMEC_FIELD(g, "scenario.bs_x", scenario.bs_position.x);
    UAVMEC_FIELD(g, "scenario.bs_y", scenario.bs_position.y);
    UAVMEC_FIELD(g, "scenario.bs_z", scenario.bs_position.z);
    UAVMEC_FIELD(g, "scenario.antenna_height_m", scenario.antenna_height_m);
    UAVMEC_FIELD(g, "scenario.lanes_per_axis", scenario.lanes_per_axis);
    UAVMEC_FIELD(g, "scenario.lambda_load", scenario.lambda_load);
    UAVMEC_FIELD(g, "scenario.lambda_pathloss", scenario.lambda_pathloss);
    UAVMEC_FIELD(g, "scenario.seed", scenario.seed);

    UAVMEC_FIELD(g, "channel.carrier_hz", channel.carrier_hz);
    UAVMEC_FIELD(g, "channel.rb_bandwidth_hz", channel.rb_bandwidth_hz);
    UAVMEC_FIELD(g, "channel.total_bandwidth_hz", channel.total_bandwidth_hz);
    UAVMEC_FIELD(g, "channel.omega_a", channel.omega_a);
    UAVMEC_FIELD(g, "channel.omega_b", channel.omega_b);
    UAVMEC_FIELD(g, "channel.eta_los_db", channel.eta_los_db);
    UAVMEC_FIELD(g, "channel.eta_nlos_db", channel.eta_nlos_db);
    UAVMEC_FIELD(g, "channel.decorrelation_m", channel.decorrelation_m);
    UAVMEC_FIELD(g, "channel.shadow_std_db", channel.shadow_std_db);
    UAVMEC_FIELD(g, "channel.rician_k_db", channel.rician_k_db);
    UAVMEC_FIELD(g, "channel.noise_dbm_per_hz", channel.noise_dbm_per_hz);
    UAVMEC_FIELD(g, "channel.noise_figure_db", channel.noise_figure_db);
    UAVMEC_FIELD(g, "channel.tx_gain_db", channel.tx_gain_db);
    UAVMEC_FIELD(g, "channel.rx_gain_bs_db", channel.rx_gain_bs_db);
    UAVMEC_FIELD(g, "channel.rx_gain_uav_db", channel.rx_gain_uav_db);
    UAVMEC_FIELD(g, "channel.p_min_dbm", channel.p_min_dbm);
    UAVMEC_FIELD(g, "channel.p_max_dbm", channel.p_max_dbm);

    UAVMEC_FIELD(g, "tasks.levels_mb", tasks.levels_mb);
    UAVMEC_FIELD(g, "tasks.total_load_mb", tasks.total_load_mb);
    UAVMEC_FIELD(g, "tasks.deadline_s", tasks.deadline_s);
    UAVMEC_FIELD(g, "tasks.cycles_per_bit", tasks.cycles_per_bit);
    UAVMEC_FIELD(g, "tasks.local_hz", tasks.local_hz);
    UAVMEC_FIELD(g, "tasks.uav_hz", tasks.uav_hz);
    UAVMEC_FIELD(g, "tasks.bs_hz", tasks.bs_hz);

    UAVMEC_FIELD(g, "energy.p_hover_w", energy.p_hover_w);
    UAVMEC_FIELD(g, "energy.v_ref_mps", energy.v_ref_mps);
    UAVMEC_FIELD(g, "energy.c_d", energy.c_d);
    UAVMEC_FIELD(g, "energy.mass_kg", energy.mass_kg);
    UAVMEC_FIELD(g, "energy.g", energy.g);
    UAVMEC_FIELD(g, "energy.c_v", energy.c_v);
    UAVMEC_FIELD(g, "energy.alpha_descent", energy.alpha_descent);
    UAVMEC_FIELD(g, "energy.p_anc_w", energy.p_anc_w);
    UAVMEC_FIELD(g, "energy.kappa", energy.kappa);
    UAVMEC_FIELD(g, "energy.w_flight", energy.w_flight);
    UAVMEC_FIELD(g, "energy.w_compute", energy.w_compute);
    UAVMEC_FIELD(g, "energy.w_comm", energy.w_comm);
    UAVMEC_FIELD(g, "weights.delay", energy.objective.delay);
    UAVMEC_FIELD(g, "weights.energy", energy.objective.energy);
    UAVMEC_FIELD(g, "weights.penalty", energy.objective.penalty);

    UAVMEC_FIELD(g, "trajectory.beta_coverage", trajectory.beta_coverage);
    UAVMEC_FIELD(g, "trajectory.beta_penalty", trajectory.beta_penalty);
    UAVMEC_FIELD(g, "trajectory.beta_altitude", trajectory.beta_altitude);
    UAVMEC_FIELD(g, "trajectory.w_eng", trajectory.w_eng);
    UAVMEC_FIELD(g, "trajectory.c_xy", trajectory.c_xy);
    UAVMEC_FIELD(g, "trajectory.c_up", trajectory.c_up);
    UAVMEC_FIELD(g, "trajectory.c_down", trajectory.c_down);
    UAVMEC_FIELD(g, "trajectory.r_min", trajectory.r_min);
    UAVMEC_FIELD(g, "trajectory.n_max_m", trajectory.n_max_m);
    UAVMEC_FIELD(g, "trajectory.omega_h", trajectory.omega_h);
    UAVMEC_FIELD(g, "trajectory.omega_e", trajectory.omega_e);
    UAVMEC_FIELD(g, "trajectory.rotate_order", trajectory.rotate_order);

    UAVMEC_FIELD(g, "agent.actor_hidden", agent.actor_hidden);
    UAVMEC_FIELD(g, "agent.critic_hidden", agent.critic_hidden);
    UAVMEC_FIELD(g, "agent.actor_lr", agent.actor_lr);
    UAVMEC_FIELD(g, "agent.critic_lr", agent.critic_lr);
    UAVMEC_FIELD(g, "agent.gamma", agent.gamma);
    UAVMEC_FIELD(g, "agent.tau", agent.tau);
    UAVMEC_FIELD(g, "agent.sigma_explore", agent.sigma_explore);
    UAVMEC_FIELD(g, "agent.sigma_decay", agent.sigma_decay);
    UAVMEC_FIELD(g, "agent.batch_size", agent.batch_size);
    UAVMEC_FIELD(g, "agent.buffer_capacity", agent.buffer_capacity);
    UAVMEC_FIELD(g, "agent.seed", agent.seed);

    UAVMEC_FIELD(g, "scheduler.mode", scheduler.mode);
    UAVMEC_FIELD(g, "scheduler.surplus_fraction", scheduler.surplus_fraction);
    UAVMEC_FIELD(g, "scheduler.max_actions", scheduler.max_actions);
    UAVMEC_FIELD(g, "scheduler.llm_base_url", scheduler.llm.base_url);
    UAVMEC_FIELD(g, "scheduler.llm_model", scheduler.llm.model);
    UAVMEC_FIELD(g, "scheduler.llm_token_env", scheduler.llm.token_env);
    UAVMEC_FIELD(g, "scheduler.llm_timeout_s", scheduler.llm.timeout_s);
    UAVMEC_FIELD(g, "scheduler.llm_attempts", scheduler.llm.attempts);

    UAVMEC_FIELD(g, "run.slots", run.slots);
    UAVMEC_FIELD(g, "run.episodes", run.episodes);
    UAVMEC_FIELD(g, "run.mode", run.mode);
    UAVMEC_FIELD(g, "run.updates_per_slot", run.updates_per_slot);
    return g;
  }();
  return r;
}

#undef UAVMEC_FIELD

}  // namespace

void SimConfig::finalize() {
  agent.num_vehicles = scenario.num_vehicles;
  scenario.validate();
  channel.validate();
  tasks.validate();
  energy.validate();
  trajectory.validate();
  agent.validate();
  if (scheduler.surplus_fraction < 0.0 || scheduler.surplus_fraction > 1.0)
    throw ConfigError("scheduler.surplus_fraction must lie in [0, 1]");
  if (scheduler.max_actions < 0) throw ConfigError("scheduler.max_actions must be >= 0");
  if (scheduler.llm.timeout_s <= 0.0) throw ConfigError("scheduler.llm_timeout_s must be positive");
  if (scheduler.llm.attempts < 1) throw ConfigError("scheduler.llm_attempts must be >= 1");
  if (run.slots < 0) throw ConfigError("run.slots must be >= 0");
  if (run.episodes < 1) throw ConfigError("run.episodes must be >= 1");
  if (run.updates_per_slot < 0) throw ConfigError("run.updates_per_slot must be >= 0");
}

void apply_assignments(SimConfig& cfg, const std::string& text, const std::string& origin) {
  const Registry& reg = registry();
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? std::string_view(raw) : std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = reg.find(key);
    if (it == reg.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + key + ": " + e.what());
    }
  }
}

SimConfig parse_config(const std::string& text, const std::string& origin) {
  SimConfig cfg;
  apply_assignments(cfg, text, origin);
  cfg.finalize();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::string dump_config(const SimConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : registry()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& kv : registry()) keys.push_back(kv.first);
  return keys;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> p{
      {"fixed-altitude", "UAVs pinned at 50 m altitude", "scenario.z_min = 50\nscenario.z_max = 50\n"},
      {"delay-focused", "objective weights (1, 0, 5)", "weights.delay = 1\nweights.energy = 0\nweights.penalty = 5\n"},
      {"energy-focused", "objective weights (1, 0.02, 5)",
       "weights.delay = 1\nweights.energy = 0.02\nweights.penalty = 5\n"},
      {"load-30", "30 Mb total offered load per slot", "tasks.total_load_mb = 30\n"},
      {"load-40", "40 Mb total offered load per slot", "tasks.total_load_mb = 40\n"},
      {"load-50", "50 Mb total offered load per slot", "tasks.total_load_mb = 50\n"},
      {"no-scheduler", "DRL allocation only, macro scheduler disabled", "scheduler.mode = off\n"},
  };
  return p;
}

void apply_preset(SimConfig& cfg, const std::string& name) {
  const auto& all = presets();
  const auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
  if (it == all.end()) throw ConfigError("unknown preset '" + name + "'");
  apply_assignments(cfg, it->overlay, "preset " + name);
}

}  // namespace uavmec
