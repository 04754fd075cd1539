#pragma once

#include <string>
#include <vector>

#include "uavmec/channel.hpp"
#include "uavmec/drl.hpp"
#include "uavmec/energy.hpp"
#include "uavmec/macro_scheduler.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/tasks.hpp"
#include "uavmec/trajectory.hpp"

namespace uavmec {

enum class SchedulerMode { off, rule, llm };
enum class RunMode { train, eval };

std::string_view to_string(SchedulerMode m);
std::string_view to_string(RunMode m);
SchedulerMode parse_scheduler_mode(const std::string& s);
RunMode parse_run_mode(const std::string& s);

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::rule;
  double surplus_fraction = 0.3;
  int max_actions = 16;
  LlmEndpoint llm;
};

struct RunConfig {
  int slots = 100;
  int episodes = 1;
  RunMode mode = RunMode::train;
  int updates_per_slot = 1;
};

struct SimConfig {
  ScenarioConfig scenario;
  ChannelConfig channel;
  TaskConfig tasks;
  EnergyConfig energy;
  TrajectoryConfig trajectory;
  AgentConfig agent;
  SchedulerConfig scheduler;
  RunConfig run;

  /// Copies shared values (vehicle count, seeds) into dependent sections and
  /// validates every section.
  void finalize();
};

/// Applies `key = value` lines ('#' starts a comment). Unknown keys and bad
/// values raise ConfigError naming `origin`, the line and the key.
void apply_assignments(SimConfig& cfg, const std::string& text, const std::string& origin = "<text>");

/// Defaults, then the file, then finalize().
SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& text, const std::string& origin = "<text>");

/// Every key in sorted order, doubles printed round-trip exact.
std::string dump_config(const SimConfig& cfg);
std::vector<std::string> config_keys();

struct Preset {
  std::string name;
  std::string description;
  std::string overlay;
};

const std::vector<Preset>& presets();
/// Throws ConfigError for an unknown name.
void apply_preset(SimConfig& cfg, const std::string& name);

}  // namespace uavmec
