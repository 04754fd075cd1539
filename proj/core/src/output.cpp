#include "uavmec/output.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

namespace uavmec {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  return f;
}

nlohmann::json action_json(const MacroAction& a) { return nlohmann::json::parse(to_json(a)); }

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "episode",        "slot",         "objective",      "psi_drl",       "reward",
      "delay_sum_s",    "normalized_delay", "estimated_delay_sum_s", "flight_energy_j", "compute_energy_j",
      "comm_energy_j",  "weighted_energy", "success_rate", "tasks",         "tasks_on_time",
      "coverage_rt",    "covered",      "failed",         "surplus",       "applied",
      "rejected",       "engine",       "bs_admitted_mb", "uav_admitted_mb", "trajectory_fallbacks",
      "critic_loss"};
  return cols;
}

std::string metrics_header() {
  std::string s;
  for (const std::string& c : metrics_columns()) s += (s.empty() ? "" : ",") + c;
  return s;
}

std::string metrics_row(const SlotMetrics& m) {
  std::string uav;
  for (std::size_t u = 0; u < m.uav_admitted_mb.size(); ++u) uav += (u ? ";" : "") + num(m.uav_admitted_mb[u]);
  const std::vector<std::string> f{std::to_string(m.episode),
                                   std::to_string(m.slot),
                                   num(m.objective),
                                   num(m.psi_drl),
                                   num(m.reward),
                                   num(m.delay_sum_s),
                                   num(m.normalized_delay),
                                   num(m.estimated_delay_sum_s),
                                   num(m.energy.flight_j),
                                   num(m.energy.compute_j),
                                   num(m.energy.comm_j),
                                   num(m.weighted_energy),
                                   num(m.success_rate),
                                   std::to_string(m.tasks),
                                   std::to_string(m.tasks_on_time),
                                   num(m.coverage_rt),
                                   std::to_string(m.covered),
                                   std::to_string(m.failed),
                                   std::to_string(m.surplus),
                                   std::to_string(m.applied),
                                   std::to_string(m.rejected),
                                   m.engine,
                                   num(m.bs_admitted_mb),
                                   uav,
                                   std::to_string(m.trajectory_fallbacks),
                                   m.update && !m.update->skipped ? num(m.update->critic_loss) : ""};
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + f[i];
  return s;
}

RunWriter::RunWriter(const std::string& dir, const SimConfig& cfg) : dir_(dir) {
  std::filesystem::create_directories(dir);
  const auto p = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  {
    std::ofstream c = open(p("config.txt"));
    c << dump_config(cfg);
  }
  metrics_ = open(p("metrics.csv"));
  metrics_ << "# uavmec metrics schema " << kMetricsSchemaVersion << '\n' << metrics_header() << '\n';
  traj_ = open(p("trajectories.csv"));
  traj_ << "episode,slot,uav,x,y,z,served\n";
  queues_ = open(p("queues.jsonl"));
  prompts_ = open(p("prompts.jsonl"));
  metrics_.flush();
  traj_.flush();
}

void RunWriter::write(const SlotResult& s) {
  const SlotMetrics& m = s.metrics;
  const SlotTrace& t = s.trace;
  metrics_ << metrics_row(m) << '\n';

  for (const UavState& u : t.uavs)
    traj_ << m.episode << ',' << m.slot << ',' << u.id << ',' << num(u.position.x) << ',' << num(u.position.y) << ','
          << num(u.position.z) << ',' << u.served_vehicles.size() << '\n';

  nlohmann::json q;
  q["episode"] = m.episode;
  q["slot"] = m.slot;
  q["records"] = nlohmann::json::array();
  for (const ReplayRecord& r : t.replay.records)
    q["records"].push_back({{"vehicle", r.vehicle},
                            {"node", r.node == kBsNode ? std::string("bs") : "uav" + std::to_string(r.node)},
                            {"arrival_s", r.arrival_s},
                            {"delay_s", r.delay_s},
                            {"service_s", r.service_s},
                            {"completion_s", r.completion_s}});
  queues_ << q.dump() << '\n';

  if (t.prompt) {
    nlohmann::json j;
    j["episode"] = m.episode;
    j["slot"] = m.slot;
    j["engine"] = m.engine;
    j["system"] = t.prompt->system;
    j["examples"] = t.prompt->examples;
    j["data"] = t.prompt->data;
    j["response"] = t.response;
    j["applied"] = nlohmann::json::array();
    for (const MacroAction& a : t.actions) j["applied"].push_back(action_json(a));
    j["rejected"] = nlohmann::json::array();
    for (const RejectedAction& r : t.rejected)
      j["rejected"].push_back({{"action", action_json(r.action)}, {"reason", r.reason}});
    prompts_ << j.dump() << '\n';
  }
  metrics_.flush();
  traj_.flush();
  queues_.flush();
  prompts_.flush();
}

}  // namespace uavmec
