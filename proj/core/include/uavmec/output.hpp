#pragma once

#include <fstream>
#include <string>

#include "uavmec/orchestrator.hpp"

namespace uavmec {

inline constexpr int kMetricsSchemaVersion = 1;

/// Column names of metrics.csv, in order.
const std::vector<std::string>& metrics_columns();
std::string metrics_header();
std::string metrics_row(const SlotMetrics& m);

/// Writes metrics.csv, trajectories.csv, queues.jsonl, prompts.jsonl and the
/// effective config into `dir`, flushing after every slot.
class RunWriter {
 public:
  RunWriter(const std::string& dir, const SimConfig& cfg);
  void write(const SlotResult& slot);
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::ofstream metrics_, traj_, queues_, prompts_;
};

}  // namespace uavmec
