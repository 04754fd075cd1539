#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uavmec/common.hpp"

namespace uavmec {

/// Node id used for the base station in queue bookkeeping; UAVs use their index.
inline constexpr int kBsNode = -1;

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleLinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TaskConfig {
  std::vector<double> levels_mb{0.0, 0.5, 1.0, 2.0};
  /// Exact per-slot total in Mb; negative draws each vehicle's level independently.
  double total_load_mb = 40.0;
  double deadline_s = 1.0;
  double cycles_per_bit = 1000.0;
  double local_hz = 0.5e9;
  double uav_hz = 5e9;
  double bs_hz = 9e9;

  void validate() const;
};

/// Per-vehicle task bits for one slot. Levels are drawn uniformly, then nudged one
/// level at a time (random vehicle) until the configured total is met exactly.
std::vector<double> generate_tasks(int num_vehicles, const TaskConfig& cfg, Rng& rng);

double compute_delay_s(double fraction, double task_bits, double cycles_per_bit, double f_hz);
double tx_delay_s(double fraction, double task_bits, double rate_bps);
double capacity_cap_bits(double f_hz, double dt_s, double cycles_per_bit);

/// Component delays of one vehicle: local compute, UAV branch (tx + queue + compute),
/// BS branch (tx + queue + compute). Absent branches are 0.
double vehicle_slot_delay(double local_s, double uav_branch_s, double bs_branch_s);

struct QueueState {
  int node = kBsNode;
  double slot_start_s = 0.0;
  double last_completion_s = 0.0;
  double compute_hz = 9e9;
  double cycles_per_bit = 1000.0;
  double slot_duration_s = 1.0;
  double admitted_bits = 0.0;

  double capacity_bits() const { return capacity_cap_bits(compute_hz, slot_duration_s, cycles_per_bit); }
  /// Fresh queue at the start of a slot.
  static QueueState fresh(int node, double compute_hz, double cycles_per_bit, double slot_duration_s,
                          double slot_start_s = 0.0);
};

struct EnqueueResult {
  double queue_delay_s = 0.0;
  QueueState next;
};

/// FIFO admission. Throws CapacityError when `bits` would exceed the slot cap.
EnqueueResult enqueue(const QueueState& q, double arrival_s, double service_s, double bits);

struct Fragment {
  int vehicle = 0;
  double arrival_s = 0.0;
  double service_s = 0.0;
  double bits = 0.0;
};

struct ReplayRecord {
  int vehicle = 0;
  int node = kBsNode;
  double arrival_s = 0.0;
  double delay_s = 0.0;
  double service_s = 0.0;
  double completion_s = 0.0;
};

/// Serves fragments in (arrival, vehicle id) order through `enqueue`.
std::vector<ReplayRecord> replay_queue(QueueState q, std::vector<Fragment> fragments);

/// Index of the load level nearest to `bits` (ties go to the lower level).
int load_bucket(double bits, const std::vector<double>& levels_mb = {0.0, 0.5, 1.0, 2.0});

class QueueHistory {
 public:
  explicit QueueHistory(std::vector<double> levels_mb = {0.0, 0.5, 1.0, 2.0}) : levels_(std::move(levels_mb)) {}

  void record(int node, double vehicle_load_bits, double delay_s);
  /// Mean recorded delay for the (node, load level) key; 0 when nothing recorded.
  double mean(int node, double vehicle_load_bits) const;
  std::size_t size(int node, double vehicle_load_bits) const;

 private:
  std::vector<double> levels_;
  std::map<std::pair<int, int>, std::vector<double>> data_;
};

/// Iteration 0 uses the history mean; later iterations reuse the delay realised
/// by the previous LP solution (0 if none was realised).
double estimate_queue_delay(const QueueHistory& history, int node, double vehicle_load_bits, int iteration,
                            std::optional<double> previous_realized);

}  // namespace uavmec
