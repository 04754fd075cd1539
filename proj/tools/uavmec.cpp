#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "uavmec/channel.hpp"
#include "uavmec/config.hpp"
#include "uavmec/orchestrator.hpp"
#include "uavmec/output.hpp"
#include "uavmec/solver.hpp"

#include <CLI11.hpp>

using namespace uavmec;
namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string config;
  std::vector<std::string> presets;
  std::vector<std::string> sets;
  std::string mode;
  std::string scheduler;
  bool fixed_altitude = false;
  int seeds = 1;
  std::int64_t seed = -1;
  int slots = -1;
  int episodes = -1;
  std::string out = "runs/latest";
  std::string llm_base_url;
  std::string llm_model;
  std::string checkpoint;
  bool frozen = false;
  int jobs = 1;
  bool print_config = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_mode) {
  cmd->add_option("--config", o.config, "Config file of flat 'key = value' lines");
  cmd->add_option("--preset", o.presets, "Preset overlay, applied in order (repeatable)");
  cmd->add_option("--set", o.sets, "Extra 'key=value' override (repeatable)");
  if (with_mode) cmd->add_option("--mode", o.mode, "train or eval")->check(CLI::IsMember({"train", "eval"}));
  cmd->add_option("--scheduler", o.scheduler, "Macro scheduler: rule, llm or off")
      ->check(CLI::IsMember({"rule", "llm", "off"}));
  cmd->add_flag("--fixed-altitude", o.fixed_altitude, "Pin UAVs at 50 m");
  cmd->add_option("--seeds", o.seeds, "Number of independent seeded runs")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "First seed (default: scenario.seed)");
  cmd->add_option("--slots", o.slots, "Slots per episode");
  cmd->add_option("--episodes", o.episodes, "Episodes per run");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--llm-base-url", o.llm_base_url, "Chat-completions base URL, e.g. http://host:8000/v1");
  cmd->add_option("--llm-model", o.llm_model, "Model name sent to the endpoint");
  cmd->add_option("--checkpoint", o.checkpoint, "Agent checkpoint to start from");
  cmd->add_flag("--frozen", o.frozen, "Replay the same scenario seed every episode");
  cmd->add_option("--jobs", o.jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);
  cmd->add_flag("--print-config", o.print_config, "Print the effective config and exit");
}

SimConfig build_config(const RunOptions& o) {
  SimConfig cfg;
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw ConfigError("cannot open config file '" + o.config + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    apply_assignments(cfg, ss.str(), o.config);
  }
  for (const std::string& p : o.presets) apply_preset(cfg, p);
  if (o.fixed_altitude) apply_preset(cfg, "fixed-altitude");
  for (const std::string& s : o.sets) apply_assignments(cfg, s, "--set");
  if (!o.mode.empty()) cfg.run.mode = parse_run_mode(o.mode);
  if (!o.scheduler.empty()) cfg.scheduler.mode = parse_scheduler_mode(o.scheduler);
  if (o.slots >= 0) cfg.run.slots = o.slots;
  if (o.episodes >= 0) cfg.run.episodes = o.episodes;
  if (o.seed >= 0) cfg.scenario.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.llm_base_url.empty()) cfg.scheduler.llm.base_url = o.llm_base_url;
  if (!o.llm_model.empty()) cfg.scheduler.llm.model = o.llm_model;
  cfg.finalize();
  return cfg;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode, bool frozen) {
  if (frozen || episode == 0) return seed;
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(episode));
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  EpisodeSummary last;
  bool aborted = false;
};

SeedOutcome run_seed(SimConfig cfg, std::uint64_t seed, const std::string& dir, const RunOptions& o) {
  cfg.scenario.seed = seed;
  Simulation sim(cfg);
  if (!o.checkpoint.empty()) sim.agent().load(o.checkpoint);
  RunWriter writer(dir, cfg);
  SeedOutcome out;
  out.seed = seed;
  for (int e = 0; e < cfg.run.episodes; ++e) {
    const EpisodeResult r =
        run_episode(sim, episode_seed(seed, e, o.frozen), [&](const SlotResult& s) { writer.write(s); });
    out.last = summarize(r.metrics);
    if (r.aborted) {
      out.aborted = true;
      break;
    }
  }
  if (cfg.run.mode == RunMode::train) sim.agent().save((fs::path(dir) / "agent.ckpt").string());
  return out;
}

int do_run(const RunOptions& o) {
  const SimConfig cfg = build_config(o);
  if (o.print_config) {
    std::cout << dump_config(cfg);
    return 0;
  }
  std::vector<SeedOutcome> results(static_cast<std::size_t>(o.seeds));
  std::atomic<int> next{0};
  std::mutex io;
  auto worker = [&] {
    for (int k = next++; k < o.seeds; k = next++) {
      const std::uint64_t seed = cfg.scenario.seed + static_cast<std::uint64_t>(k);
      const std::string dir = o.seeds > 1 ? (fs::path(o.out) / ("seed_" + std::to_string(seed))).string() : o.out;
      SeedOutcome r = run_seed(cfg, seed, dir, o);
      {
        std::lock_guard lock(io);
        std::printf("seed %llu: objective %.6g  success %.4f  R_t %.4f  delay %.4g s  energy %.6g J%s  -> %s\n",
                    static_cast<unsigned long long>(seed), r.last.mean_objective, r.last.mean_success,
                    r.last.mean_coverage, r.last.mean_delay_s, r.last.mean_energy_j, r.aborted ? "  (aborted)" : "",
                    dir.c_str());
      }
      results[static_cast<std::size_t>(k)] = r;
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::min(o.jobs, o.seeds); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return std::any_of(results.begin(), results.end(), [](const SeedOutcome& r) { return r.aborted; }) ? 2 : 0;
}

int validate_channel() {
  const ChannelConfig ch;
  bool ok = true;
  auto report = [&](const char* what, double got, double want, double tol) {
    const bool pass = std::abs(got - want) <= tol;
    ok = ok && pass;
    std::printf("%-40s %.12g (expected %.12g) %s\n", what, got, want, pass ? "ok" : "FAIL");
  };
  report("V2I path loss at 1000 m [dB]", v2i_pathloss_db(1000.0), 128.1, 1e-9);
  report("LoS probability at 9.61 deg", los_probability_deg(9.61, ch), 1.0 / 10.61, 1e-9);
  report("resource blocks", ch.total_rbs(), 55, 0);
  Rng rng(7);
  const int n = 200000;
  double ray = 0.0, ric = 0.0;
  for (int i = 0; i < n; ++i) {
    ray += rayleigh_power_gain(rng);
    ric += rician_power_gain(ch.rician_k_linear(), rng);
  }
  report("Rayleigh mean power (2e5 draws)", ray / n, 1.0, 0.01);
  report("Rician mean power (2e5 draws)", ric / n, 1.0, 0.01);
  return ok ? 0 : 1;
}

int validate_solver(const std::string& problem, int count) {
  if (!problem.empty()) {
    std::ifstream f(problem);
    if (!f) throw ConfigError("cannot open '" + problem + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    const ConeProgram cp = cone_program_from_json(ss.str());
    const SolveResult r = solve_socp(cp);
    const FeasibilityReport fr = check_solution(cp, r.x);
    std::printf("status %s  objective %.12g  iterations %d  worst violation %.3g\n",
                std::string(to_string(r.status)).c_str(), r.objective, r.iterations, r.optimal() ? fr.worst() : NAN);
    return r.optimal() ? 0 : 1;
  }
  // Random LPs feasible by construction: box bounds plus rows satisfied by a known point.
  Rng rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int failures = 0;
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const int n = 5 + k % 6, m = 3 + k % 5;
    LinearProgram lp;
    lp.c = Eigen::VectorXd::NullaryExpr(n, [&] { return U(rng); });
    lp.A_ineq = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return U(rng); });
    const Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.5 * U(rng); });
    lp.b_ineq = lp.A_ineq * x0 + Eigen::VectorXd::Constant(m, 0.5);
    lp.lower = Eigen::VectorXd::Constant(n, -1.0);
    lp.upper = Eigen::VectorXd::Constant(n, 1.0);
    const SolveResult r = solve_lp(lp);
    if (!r.optimal()) {
      ++failures;
      continue;
    }
    worst = std::max(worst, check_solution(lp, r.x).worst());
  }
  std::printf("%d random LPs: %d not optimal, worst constraint violation %.3g\n", count, failures, worst);
  return failures == 0 && worst <= 1e-6 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV vehicular edge-computing simulator"};
  app.require_subcommand(1);

  RunOptions run_opts, train_opts, eval_opts;
  auto* run = app.add_subcommand("run", "Run seeded episodes and write metrics");
  add_run_options(run, run_opts, true);
  auto* train = app.add_subcommand("train", "Run in training mode and save agent.ckpt");
  add_run_options(train, train_opts, false);
  auto* eval = app.add_subcommand("eval", "Run greedily without learning");
  add_run_options(eval, eval_opts, false);

  auto* vch = app.add_subcommand("validate-channel", "Check channel-model anchors");
  std::string problem;
  int count = 50;
  auto* vsol = app.add_subcommand("validate-solver", "Solve a JSON problem or random self-check LPs");
  vsol->add_option("--problem", problem, "Problem in the solver's JSON format");
  vsol->add_option("--count", count, "Number of random LPs")->check(CLI::PositiveNumber);
  auto* lp = app.add_subcommand("list-presets", "List named config overlays");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return do_run(run_opts);
    if (train->parsed()) {
      train_opts.mode = "train";
      return do_run(train_opts);
    }
    if (eval->parsed()) {
      eval_opts.mode = "eval";
      return do_run(eval_opts);
    }
    if (vch->parsed()) return validate_channel();
    if (vsol->parsed()) return validate_solver(problem, count);
    if (lp->parsed()) {
      for (const Preset& p : presets()) std::printf("%-16s %s\n", p.name.c_str(), p.description.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
