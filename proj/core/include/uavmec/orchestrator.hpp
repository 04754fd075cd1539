#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uavmec/config.hpp"
#include "uavmec/drl.hpp"
#include "uavmec/macro_scheduler.hpp"
#include "uavmec/offload_lp.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/tasks.hpp"
#include "uavmec/trajectory.hpp"

namespace uavmec {

/// Pipeline stages in execution order. Optional ones (scheduler, apply, lp2)
/// are skipped when no task failed or the scheduler is off.
enum class Stage {
  trajectory,
  channel,
  state,
  action,
  allocation,
  lp1,
  queue_update1,
  classify,
  scheduler,
  apply,
  lp2,
  replay,
  store,
  update,
  mobility,
};
std::string_view to_string(Stage s);
/// Canonical order used to validate traces.
const std::vector<Stage>& stage_order();
/// True when `trace` is a subsequence of stage_order() containing every mandatory stage.
bool valid_stage_trace(const std::vector<Stage>& trace);

class SlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SlotMetrics {
  int episode = 0;
  int slot = 0;
  /// Final plan objective and the LP #1 objective the agent is rewarded with.
  double objective = 0.0;
  double psi_drl = 0.0;
  double reward = 0.0;
  /// Sums over vehicles with load: replayed completion, and replayed completion / deadline.
  double delay_sum_s = 0.0;
  double normalized_delay = 0.0;
  /// Same from the final LP estimate.
  double estimated_delay_sum_s = 0.0;
  EnergyBreakdown energy;
  double weighted_energy = 0.0;
  double success_rate = 1.0;
  int tasks = 0;
  int tasks_on_time = 0;
  double coverage_rt = 0.0;
  int covered = 0;
  int failed = 0;
  int surplus = 0;
  int applied = 0;
  int rejected = 0;
  /// "none", "rule", "llm" or "llm->rule" when the endpoint failed.
  std::string engine = "none";
  double bs_admitted_mb = 0.0;
  std::vector<double> uav_admitted_mb;
  int trajectory_fallbacks = 0;
  std::optional<UpdateStats> update;
};

/// Everything a slot produced, for tests and the output writers.
struct SlotTrace {
  std::vector<Stage> stages;
  std::vector<UavState> uavs;
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  ResourceAllocation alloc1;
  ResourceAllocation alloc_final;
  std::vector<OffloadVehicle> lp1_vehicles;
  OffloadPlan plan1;
  std::vector<OffloadVehicle> final_vehicles;
  OffloadPlan final_plan;
  bool lp2_solved = false;
  TaskOutcomes outcomes;
  std::optional<PromptBundle> prompt;
  std::string response;
  std::vector<MacroAction> actions;
  std::vector<RejectedAction> rejected;
  ReplayedSlot replay;
};

struct SlotResult {
  SlotMetrics metrics;
  SlotTrace trace;
};

/// Maps a state to an action; replaces the agent's policy when set.
using PolicyOverride = std::function<Eigen::VectorXd(const Eigen::VectorXd& state)>;
/// Returns the model's reply for a prompt; replaces the HTTP call when set.
using LlmTransport = std::function<std::string(const PromptBundle& bundle)>;

/// One episode's world state plus the agent acting in it. Slots run strictly in
/// sequence; the agent outlives reset() so learning carries across episodes.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg, std::shared_ptr<DdpgAgent> agent = nullptr);

  /// Fresh scenario, queues and random streams derived from `seed`.
  void reset(std::uint64_t seed);
  SlotResult run_slot();
  /// Pushes the pending transition as terminal and closes the agent's episode.
  void finish_episode();

  const SimConfig& config() const { return cfg_; }
  const Scenario& scenario() const { return scn_; }
  int slot() const { return slot_; }
  int episode() const { return episode_; }
  DdpgAgent& agent() { return *agent_; }
  std::shared_ptr<DdpgAgent> agent_ptr() const { return agent_; }
  const QueueHistory& queue_history() const { return history_; }

  void set_policy(PolicyOverride p) { policy_ = std::move(p); }
  void set_llm_transport(LlmTransport t) { llm_ = std::move(t); }

 private:
  struct Links;
  Links refresh_links();
  std::vector<OffloadVehicle> lp_inputs(const Links& links, const ResourceAllocation& alloc,
                                        const ReplayedSlot* realized) const;
  std::vector<MacroAction> scheduler_actions(const TaskOutcomes& outcomes, const ResourceAllocation& alloc,
                                             const SlotSnapshot& snap, SlotResult& out);

  SimConfig cfg_;
  std::shared_ptr<DdpgAgent> agent_;
  Scenario scn_;
  QueueHistory history_;
  OffloadParams params_;
  Rng mobility_rng_, task_rng_, channel_rng_;
  int slot_ = 0;
  int episode_ = -1;
  struct Pending {
    Eigen::VectorXd state, action;
    double reward = 0.0;
  };
  std::optional<Pending> pending_;
  PolicyOverride policy_;
  LlmTransport llm_;
};

/// Receives each slot as it completes.
using SlotSink = std::function<void(const SlotResult&)>;

struct EpisodeResult {
  std::vector<SlotMetrics> metrics;
  /// Set when a solver failure stopped the episode early.
  std::optional<std::string> aborted;
};

/// cfg.run.slots slots of one episode on `sim`, after sim.reset(seed).
EpisodeResult run_episode(Simulation& sim, std::uint64_t seed, const SlotSink& sink = nullptr);

struct EpisodeSummary {
  double mean_objective = 0.0;
  double mean_reward = 0.0;
  double mean_success = 0.0;
  double mean_coverage = 0.0;
  double mean_delay_s = 0.0;
  double mean_energy_j = 0.0;
};
EpisodeSummary summarize(const std::vector<SlotMetrics>& m);

}  // namespace uavmec
