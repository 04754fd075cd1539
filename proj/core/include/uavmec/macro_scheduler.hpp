#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uavmec/drl.hpp"
#include "uavmec/offload_lp.hpp"

namespace uavmec {

enum class TaskClass { failed, surplus, nominal };
std::string_view to_string(TaskClass c);

struct LinkSummary {
  bool active = false;
  int rb_count = 0;
  double power_dbm = 0.0;
  double pathloss_db = 0.0;
};

struct TaskOutcome {
  int vehicle = 0;
  double completion_s = 0.0;
  double deadline_s = 1.0;
  double slack_s = 0.0;
  TaskClass classification = TaskClass::nominal;
  LinkSummary v2i, v2u;
};

struct TaskOutcomes {
  /// Ascending slack (worst first), ties by vehicle id.
  std::vector<TaskOutcome> failed;
  /// Descending slack, ties by vehicle id.
  std::vector<TaskOutcome> surplus;
  std::vector<TaskOutcome> nominal;
};

/// Mean path loss per vehicle and link, aligned with the plan rows.
struct LinkPathloss {
  double v2i_db = 0.0;
  std::optional<double> v2u_db;
};

/// failed <=> slack < 0, surplus <=> slack >= surplus_fraction * deadline.
TaskOutcomes classify_tasks(const OffloadPlan& plan, const ResourceAllocation& alloc,
                            const std::vector<LinkPathloss>& pathloss, double surplus_fraction = 0.3);

// ---------------------------------------------------------------------------
// Macro actions

enum class MacroKind { transfer_rb, update_power };

struct MacroAction {
  MacroKind kind = MacroKind::transfer_rb;
  int from_vehicle = 0;
  LinkKind from_link = LinkKind::v2i;
  int to_vehicle = 0;
  LinkKind to_link = LinkKind::v2i;
  int count = 1;
  /// update_power uses `vehicle` and `link`.
  int vehicle = 0;
  LinkKind link = LinkKind::v2i;
  double power_dbm = 0.0;

  static MacroAction transfer(int from_vehicle, LinkKind from_link, int to_vehicle, LinkKind to_link, int count = 1);
  static MacroAction power(int vehicle, LinkKind link, double power_dbm);
  bool operator==(const MacroAction&) const = default;
};

/// Compact JSON object in the wire schema.
std::string to_json(const MacroAction& a);
std::string to_json(const std::vector<MacroAction>& actions);

struct ParsedActions {
  std::vector<MacroAction> actions;
  /// One message per element that could not be mapped to an action.
  std::vector<std::string> skipped;
};

/// Extracts the first well-formed JSON array from free text. Returns nullopt
/// when the text holds no array at all.
std::optional<ParsedActions> parse_actions(const std::string& text);

struct SchedulerLimits {
  double p_min_dbm = 5.0;
  double p_max_dbm = 23.0;
  int max_actions = 16;
};

/// Linear gain of RB `rb` on a link of the vehicle at `vehicle_index`.
using RbGain = std::function<double(int vehicle_index, LinkKind link, int rb)>;

struct RejectedAction {
  MacroAction action;
  std::string reason;
};

struct ApplyResult {
  ResourceAllocation allocation;
  std::vector<MacroAction> applied;
  std::vector<RejectedAction> rejected;
};

/// Applies actions in order, each checked against the state left by the ones
/// before it. A donor releases its lowest-gain RBs first (highest index when no
/// gain lookup is given).
ApplyResult validate_and_apply(const std::vector<MacroAction>& actions, const ResourceAllocation& alloc,
                               const SchedulerLimits& limits, const RbGain& gain = nullptr);

// ---------------------------------------------------------------------------
// Prompt

struct PromptBundle {
  std::string system;
  std::string examples;
  std::string data;

  /// User message: examples followed by data.
  std::string user() const { return examples + data; }
  std::string full() const { return system + examples + data; }
  bool operator==(const PromptBundle&) const = default;
};

const std::string& system_prompt();
const std::string& few_shot_examples();

/// Data block holds failed and surplus tasks only, serialised with sorted keys.
PromptBundle build_prompt(const TaskOutcomes& outcomes);

// ---------------------------------------------------------------------------
// Rule engine

/// Everything the projected-slack model needs about the slot. Vehicle indices
/// refer to positions in `vehicles`, `plan.rows` and the allocation alike.
struct SlotSnapshot {
  std::vector<OffloadVehicle> vehicles;
  OffloadParams params;
  /// LP #1 result aligned with `vehicles`.
  OffloadPlan plan;
  /// Rate of a link for a hypothetical allocation of it.
  std::function<double(int vehicle_index, LinkKind link, const LinkAllocation& la)> rate;
  RbGain gain;
};

/// Shortest makespan of one vehicle with fractions re-balanced freely over its
/// present branches at the given rates (queue and compute terms held fixed).
double balanced_completion(const OffloadVehicle& v, const OffloadParams& p);

/// LP #1 completion shifted by the change in balanced makespan that the
/// allocation's rates would cause.
double projected_completion(const SlotSnapshot& snap, int vehicle_index, const ResourceAllocation& alloc);

/// Deterministic stand-in for the LLM: for each failed task worst first, raise
/// its bottleneck link to p_max, then pull RBs one at a time from surplus donors.
std::vector<MacroAction> rule_based_actions(const TaskOutcomes& outcomes, const ResourceAllocation& alloc,
                                            const SlotSnapshot& snap, const SchedulerLimits& limits);

// ---------------------------------------------------------------------------
// Remote endpoint

struct LlmEndpoint {
  std::string base_url;
  std::string model;
  /// Environment variable holding the bearer token; unset or empty means no header.
  std::string token_env = "UAVMEC_LLM_TOKEN";
  double timeout_s = 10.0;
  int attempts = 2;
};

class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chat-completion request body for the bundle (temperature 0).
std::string chat_request_body(const PromptBundle& bundle, const std::string& model);

/// POSTs to base_url + /chat/completions (base_url usually ends in /v1) and returns the first choice text.
/// Throws EndpointError once every attempt has failed.
std::string call_llm(const PromptBundle& bundle, const LlmEndpoint& endpoint);

}  // namespace uavmec
