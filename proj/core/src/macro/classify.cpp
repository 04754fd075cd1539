#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "uavmec/macro_scheduler.hpp"

namespace uavmec {

using nlohmann::json;

std::string_view to_string(TaskClass c) {
  switch (c) {
    case TaskClass::failed:
      return "failed";
    case TaskClass::surplus:
      return "surplus";
    case TaskClass::nominal:
      return "nominal";
  }
  return "nominal";
}

TaskOutcomes classify_tasks(const OffloadPlan& plan, const ResourceAllocation& alloc,
                            const std::vector<LinkPathloss>& pathloss, double surplus_fraction) {
  if (!pathloss.empty() && pathloss.size() != plan.rows.size())
    throw ConfigError("classify_tasks: path loss list must align with the plan rows");
  TaskOutcomes out;
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    const OffloadRow& r = plan.rows[i];
    TaskOutcome o;
    o.vehicle = r.vehicle;
    o.completion_s = r.completion_s;
    o.deadline_s = r.deadline_s;
    o.slack_s = r.deadline_s - r.completion_s;
    if (const int k = alloc.index_of(r.vehicle); k >= 0) {
      const VehicleAllocation& va = alloc.vehicles[static_cast<std::size_t>(k)];
      o.v2i = {va.v2i.active, va.v2i.rb_count(), va.v2i.power_dbm, 0.0};
      o.v2u = {va.v2u.active, va.v2u.rb_count(), va.v2u.power_dbm, 0.0};
    }
    if (!pathloss.empty()) {
      o.v2i.pathloss_db = pathloss[i].v2i_db;
      o.v2u.pathloss_db = pathloss[i].v2u_db.value_or(0.0);
    }
    if (o.slack_s < 0.0) {
      o.classification = TaskClass::failed;
      out.failed.push_back(o);
    } else if (o.slack_s >= surplus_fraction * o.deadline_s) {
      o.classification = TaskClass::surplus;
      out.surplus.push_back(o);
    } else {
      out.nominal.push_back(o);
    }
  }
  std::stable_sort(out.failed.begin(), out.failed.end(), [](const TaskOutcome& a, const TaskOutcome& b) {
    return a.slack_s != b.slack_s ? a.slack_s < b.slack_s : a.vehicle < b.vehicle;
  });
  std::stable_sort(out.surplus.begin(), out.surplus.end(), [](const TaskOutcome& a, const TaskOutcome& b) {
    return a.slack_s != b.slack_s ? a.slack_s > b.slack_s : a.vehicle < b.vehicle;
  });
  return out;
}

namespace {

double round_to(double x, double q) {
  const double inv = std::round(1.0 / q);
  return std::round(x * inv) / inv;
}

json link_json(const LinkSummary& l) {
  if (!l.active) return nullptr;
  return {{"rbs", l.rb_count}, {"power_dbm", round_to(l.power_dbm, 0.01)}, {"pathloss_db", round_to(l.pathloss_db, 0.01)}};
}

json outcome_json(const TaskOutcome& o) {
  return {{"vehicle", o.vehicle},
          {"status", std::string(to_string(o.classification))},
          {"slack_s", round_to(o.slack_s, 1e-4)},
          {"deadline_s", round_to(o.deadline_s, 1e-4)},
          {"v2i", link_json(o.v2i)},
          {"v2u", link_json(o.v2u)}};
}

}  // namespace

const std::string& system_prompt() {
  static const std::string text =
      "You adjust radio resources for vehicles that offload computing tasks to a base station and to UAVs.\n"
      "Input: a JSON array of tasks. status \"failed\" means the task misses its deadline (slack_s < 0); "
      "status \"surplus\" means it finishes well ahead of its deadline. Each task lists its links v2i "
      "(to the base station) and v2u (to its UAV, null when uncovered) with RB count, transmit power in dBm and "
      "path loss in dB.\n"
      "Goal: make failed tasks meet their deadlines by moving RBs away from surplus tasks and by raising power.\n"
      "Reply with a JSON array of actions and nothing that contradicts it. Allowed actions:\n"
      "{\"action\":\"transfer_rb\",\"from_vehicle\":int,\"from_link\":\"v2i\"|\"v2u\",\"to_vehicle\":int,"
      "\"to_link\":\"v2i\"|\"v2u\",\"count\":int}\n"
      "{\"action\":\"update_power\",\"vehicle\":int,\"link\":\"v2i\"|\"v2u\",\"power_dbm\":number}\n"
      "Hard constraints:\n"
      "1. A transfer must leave its source link with at least one RB.\n"
      "2. Transfers move RBs; the total number of RBs never changes.\n"
      "3. Power must stay within [5, 23] dBm.\n"
      "4. Both links of a transfer must exist; v2u exists only for covered vehicles.\n"
      "5. At most 16 actions.\n"
      "Actions that break a constraint are discarded. Return [] when nothing helps.\n";
  return text;
}

const std::string& few_shot_examples() {
  static const std::string text =
      "Example input:\n"
      "[{\"deadline_s\":1.0,\"slack_s\":-0.12,\"status\":\"failed\",\"v2i\":{\"pathloss_db\":112.4,\"power_dbm\":"
      "23.0,\"rbs\":2},\"v2u\":{\"pathloss_db\":96.1,\"power_dbm\":17.0,\"rbs\":1},\"vehicle\":7},"
      "{\"deadline_s\":1.0,\"slack_s\":0.61,\"status\":\"surplus\",\"v2i\":{\"pathloss_db\":101.9,\"power_dbm\":"
      "14.0,\"rbs\":5},\"v2u\":null,\"vehicle\":3}]\n"
      "Example output:\n"
      "[{\"action\":\"update_power\",\"vehicle\":7,\"link\":\"v2u\",\"power_dbm\":23.0},"
      "{\"action\":\"transfer_rb\",\"from_vehicle\":3,\"from_link\":\"v2i\",\"to_vehicle\":7,\"to_link\":\"v2u\","
      "\"count\":2}]\n"
      "Current slot:\n";
  return text;
}

PromptBundle build_prompt(const TaskOutcomes& outcomes) {
  json data = json::array();
  for (const TaskOutcome& o : outcomes.failed) data.push_back(outcome_json(o));
  for (const TaskOutcome& o : outcomes.surplus) data.push_back(outcome_json(o));
  return {system_prompt(), few_shot_examples(), data.dump()};
}

}  // namespace uavmec
