#include "uavmec/orchestrator.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <random>
#include <set>

namespace uavmec {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::trajectory: return "trajectory";
    case Stage::channel: return "channel";
    case Stage::state: return "state";
    case Stage::action: return "action";
    case Stage::allocation: return "allocation";
    case Stage::lp1: return "lp1";
    case Stage::queue_update1: return "queue_update1";
    case Stage::classify: return "classify";
    case Stage::scheduler: return "scheduler";
    case Stage::apply: return "apply";
    case Stage::lp2: return "lp2";
    case Stage::replay: return "replay";
    case Stage::store: return "store";
    case Stage::update: return "update";
    case Stage::mobility: return "mobility";
  }
  return "unknown";
}

const std::vector<Stage>& stage_order() {
  static const std::vector<Stage> order{Stage::trajectory, Stage::channel,  Stage::state,         Stage::action,
                                        Stage::allocation, Stage::lp1,      Stage::queue_update1, Stage::classify,
                                        Stage::scheduler,  Stage::apply,    Stage::lp2,           Stage::replay,
                                        Stage::store,      Stage::update,   Stage::mobility};
  return order;
}

bool valid_stage_trace(const std::vector<Stage>& trace) {
  const auto& order = stage_order();
  std::size_t k = 0;
  for (Stage s : trace) {
    while (k < order.size() && order[k] != s) ++k;
    if (k == order.size()) return false;
    ++k;
  }
  const std::set<Stage> seen(trace.begin(), trace.end());
  if (seen.size() != trace.size()) return false;
  for (Stage s : {Stage::trajectory, Stage::channel, Stage::state, Stage::action, Stage::allocation, Stage::lp1,
                  Stage::queue_update1, Stage::classify, Stage::replay, Stage::mobility})
    if (!seen.count(s)) return false;
  const bool sched = seen.count(Stage::scheduler) > 0;
  if (sched != (seen.count(Stage::apply) > 0) || sched != (seen.count(Stage::lp2) > 0)) return false;
  return seen.count(Stage::update) == 0 || seen.count(Stage::store) > 0;
}

struct Simulation::Links {
  /// Mean V2I path loss (shadowing excluded) and the serving UAV's G2A path loss.
  std::vector<double> pl_v2i;
  std::vector<std::optional<double>> pl_v2u;
  std::vector<std::optional<int>> serving;
  std::vector<std::vector<double>> gain_v2i, gain_v2u;
};

Simulation::Simulation(SimConfig cfg, std::shared_ptr<DdpgAgent> agent) : cfg_(std::move(cfg)) {
  cfg_.finalize();
  agent_ = agent ? std::move(agent) : std::make_shared<DdpgAgent>(cfg_.agent);
  if (agent_->config().num_vehicles != cfg_.scenario.num_vehicles)
    throw ConfigError("simulation: agent sized for " + std::to_string(agent_->config().num_vehicles) +
                      " vehicles, scenario has " + std::to_string(cfg_.scenario.num_vehicles));
  params_ = OffloadParams::from(cfg_.tasks, cfg_.scenario.num_uavs, cfg_.scenario.slot_duration_s, cfg_.energy);
}

namespace {

Rng stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return Rng(seq);
}

void assign_tasks(std::vector<VehicleState>& vs, const TaskConfig& cfg, Rng& rng) {
  const std::vector<double> bits = generate_tasks(static_cast<int>(vs.size()), cfg, rng);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    vs[i].task_bits = bits[i];
    vs[i].deadline_s = cfg.deadline_s;
  }
}

Point3 antenna(const VehicleState& v, double h) { return {v.position.x, v.position.y, h}; }

}  // namespace

void Simulation::reset(std::uint64_t seed) {
  ScenarioConfig sc = cfg_.scenario;
  sc.seed = seed;
  scn_ = init_scenario(sc, cfg_.tasks.uav_hz);
  mobility_rng_ = stream(seed, 1);
  task_rng_ = stream(seed, 2);
  channel_rng_ = stream(seed, 3);
  history_ = QueueHistory(cfg_.tasks.levels_mb);
  std::normal_distribution<double> shadow(0.0, cfg_.channel.shadow_std_db);
  for (VehicleState& v : scn_.vehicles) v.shadow_db = shadow(channel_rng_);
  assign_tasks(scn_.vehicles, cfg_.tasks, task_rng_);
  slot_ = 0;
  ++episode_;
  pending_.reset();
}

Simulation::Links Simulation::refresh_links() {
  const ChannelConfig& ch = cfg_.channel;
  const ScenarioConfig& sc = cfg_.scenario;
  const int R = ch.total_rbs();
  const auto M = scn_.vehicles.size();
  Links L;
  L.pl_v2i.resize(M);
  L.pl_v2u.resize(M);
  L.serving.resize(M);
  L.gain_v2i.resize(M);
  L.gain_v2u.resize(M);

  std::vector<double> load(scn_.uavs.size(), 0.0);
  std::vector<int> count(scn_.uavs.size(), 0);
  for (std::size_t u = 0; u < scn_.uavs.size(); ++u)
    for (const VehicleState& v : scn_.vehicles)
      if (coverage_indicator(scn_.uavs[u], v, sc.theta_max_rad)) {
        load[u] += v.task_bits;
        ++count[u];
      }
  const double max_bits =
      cfg_.tasks.levels_mb.empty() ? 2e6 : *std::max_element(cfg_.tasks.levels_mb.begin(), cfg_.tasks.levels_mb.end()) * kBitsPerMb;

  const double k_lin = ch.rician_k_linear();
  for (std::size_t m = 0; m < M; ++m) {
    const VehicleState& v = scn_.vehicles[m];
    const Point3 a = antenna(v, sc.antenna_height_m);
    L.pl_v2i[m] = v2i_pathloss_db(distance3(a, sc.bs_position));
    std::vector<ServingCandidate> cands;
    std::vector<double> pl_by_uav(scn_.uavs.size(), 0.0);
    for (std::size_t u = 0; u < scn_.uavs.size(); ++u) {
      if (!coverage_indicator(scn_.uavs[u], v, sc.theta_max_rad)) continue;
      const double dz = scn_.uavs[u].position.z - sc.antenna_height_m;
      pl_by_uav[u] = g2a_mean_pathloss_db(distance3(a, scn_.uavs[u].position), dz, ch);
      cands.push_back({scn_.uavs[u].id, load[u], count[u], pl_by_uav[u]});
    }
    L.serving[m] = select_serving_uav(cands, sc.lambda_load, sc.lambda_pathloss, max_bits);
    if (L.serving[m]) L.pl_v2u[m] = pl_by_uav[static_cast<std::size_t>(*L.serving[m])];

    L.gain_v2i[m].resize(static_cast<std::size_t>(R));
    for (double& g : L.gain_v2i[m]) g = rayleigh_power_gain(channel_rng_);
    L.gain_v2u[m].resize(static_cast<std::size_t>(R));
    for (double& g : L.gain_v2u[m]) g = rician_power_gain(k_lin, channel_rng_);
  }
  return L;
}

std::vector<OffloadVehicle> Simulation::lp_inputs(const Links& L, const ResourceAllocation& alloc,
                                                  const ReplayedSlot* realized) const {
  const ChannelConfig& ch = cfg_.channel;
  std::map<std::pair<int, int>, double> seen;
  if (realized)
    for (const ReplayRecord& r : realized->records) seen[{r.vehicle, r.node}] = r.delay_s;
  auto q_hat = [&](int vehicle, int node, double bits) {
    const double history = estimate_queue_delay(history_, node, bits, 0, std::nullopt);
    if (!realized) return history;
    const auto it = seen.find({vehicle, node});
    return estimate_queue_delay(history_, node, bits, 1, it != seen.end() ? it->second : history);
  };

  std::vector<OffloadVehicle> out;
  for (std::size_t m = 0; m < scn_.vehicles.size(); ++m) {
    const VehicleState& s = scn_.vehicles[m];
    OffloadVehicle v;
    v.id = s.id;
    v.task_bits = s.task_bits;
    v.deadline_s = s.deadline_s;
    v.serving_uav = L.serving[m];
    const int idx = alloc.index_of(s.id);
    if (idx >= 0) {
      const VehicleAllocation& va = alloc.vehicles[static_cast<std::size_t>(idx)];
      const LinkAllocation& i = va.v2i;
      const LinkAllocation& u = va.v2u;
      if (i.active && i.rb_count() > 0)
        v.rate_v2i_bps = v2i_rate_bps(i.rb_count(), i.power_dbm, L.pl_v2i[m], s.shadow_db,
                                      effective_fading_db(L.gain_v2i[m], i.rbs), ch);
      if (u.active && u.rb_count() > 0 && L.pl_v2u[m])
        v.rate_v2u_bps = g2a_rate_bps(u.rb_count(), u.power_dbm, *L.pl_v2u[m], effective_fading_db(L.gain_v2u[m], u.rbs), ch);
      v.power_v2i_dbm = i.power_dbm;
      v.power_v2u_dbm = u.power_dbm;
    }
    v.queue_bs_s = q_hat(v.id, kBsNode, v.task_bits);
    if (v.serving_uav) v.queue_uav_s = q_hat(v.id, *v.serving_uav, v.task_bits);
    out.push_back(v);
  }
  return out;
}

std::vector<MacroAction> Simulation::scheduler_actions(const TaskOutcomes& outcomes, const ResourceAllocation& alloc,
                                                       const SlotSnapshot& snap, SlotResult& out) {
  SchedulerLimits limits{cfg_.channel.p_min_dbm, cfg_.channel.p_max_dbm, cfg_.scheduler.max_actions};
  SlotTrace& tr = out.trace;
  tr.prompt = build_prompt(outcomes);
  if (cfg_.scheduler.mode == SchedulerMode::llm) {
    try {
      tr.response = llm_ ? llm_(*tr.prompt) : call_llm(*tr.prompt, cfg_.scheduler.llm);
      auto parsed = parse_actions(tr.response);
      if (!parsed) throw EndpointError("reply holds no JSON array");
      for (const std::string& msg : parsed->skipped) std::clog << "[scheduler] skipped element: " << msg << '\n';
      out.metrics.engine = "llm";
      return parsed->actions;
    } catch (const std::exception& e) {
      std::clog << "[scheduler] llm unavailable (" << e.what() << "), using rule engine\n";
      out.metrics.engine = "llm->rule";
    }
  } else {
    out.metrics.engine = "rule";
  }
  std::vector<MacroAction> actions = rule_based_actions(outcomes, alloc, snap, limits);
  if (out.metrics.engine == "rule") tr.response = to_json(actions);
  return actions;
}

SlotResult Simulation::run_slot() {
  if (episode_ < 0) throw ConfigError("simulation: reset() must be called before run_slot()");
  const bool train = cfg_.run.mode == RunMode::train;
  const ChannelConfig& ch = cfg_.channel;
  const double dt = cfg_.scenario.slot_duration_s;
  SlotResult out;
  SlotMetrics& m = out.metrics;
  SlotTrace& tr = out.trace;
  m.episode = episode_;
  m.slot = slot_;
  auto mark = [&](Stage s) { tr.stages.push_back(s); };

  mark(Stage::trajectory);
  const PlanResult pr = plan_all_trajectories(scn_.uavs, scn_.vehicles, cfg_.scenario, cfg_.trajectory, slot_);
  double flight = 0.0;
  for (std::size_t u = 0; u < scn_.uavs.size(); ++u)
    flight += uav_slot_energy_j(scn_.uavs[u].position, pr.uavs[u].position, dt, cfg_.energy);
  scn_.uavs = pr.uavs;
  m.trajectory_fallbacks = static_cast<int>(pr.fallbacks.size());
  m.coverage_rt = coverage_metric(scn_.uavs, scn_.vehicles, flight, cfg_.scenario, cfg_.trajectory);
  m.covered = covered_vehicle_count(scn_.uavs, scn_.vehicles, cfg_.scenario.theta_max_rad);
  m.energy.flight_j = flight;
  tr.uavs = scn_.uavs;

  mark(Stage::channel);
  const Links L = refresh_links();
  const auto M = scn_.vehicles.size();

  mark(Stage::state);
  std::vector<VehicleObservation> obs(M);
  std::vector<LinkPathloss> pathloss(M);
  for (std::size_t i = 0; i < M; ++i) {
    obs[i] = {scn_.vehicles[i].task_bits, L.pl_v2i[i] - scn_.vehicles[i].shadow_db, L.pl_v2u[i]};
    pathloss[i] = {obs[i].pathloss_v2i_db, L.pl_v2u[i]};
  }
  tr.state = build_state(obs);

  mark(Stage::action);
  tr.action = policy_ ? policy_(tr.state) : agent_->act(tr.state, train);

  mark(Stage::allocation);
  std::vector<LinkContext> ctx(M);
  for (std::size_t i = 0; i < M; ++i) {
    const bool load = scn_.vehicles[i].task_bits > 0.0;
    ctx[i] = {scn_.vehicles[i].id, load, load && L.serving[i].has_value(), L.gain_v2i[i], L.gain_v2u[i]};
  }
  tr.alloc1 = map_action_to_allocation(tr.action, ctx, ch);

  mark(Stage::lp1);
  tr.lp1_vehicles = lp_inputs(L, tr.alloc1, nullptr);
  tr.plan1 = solve_offload(build_offload_lp(tr.lp1_vehicles, params_));
  if (!tr.plan1.ok())
    throw SlotError("slot " + std::to_string(slot_) + ": LP #1 failed (" + std::string(to_string(tr.plan1.status)) + ")");
  m.psi_drl = tr.plan1.objective;
  m.reward = compute_reward(m.psi_drl);

  mark(Stage::queue_update1);
  const ReplayedSlot replay1 = replay_offload(tr.plan1, tr.lp1_vehicles, params_);

  mark(Stage::classify);
  tr.outcomes = classify_tasks(tr.plan1, tr.alloc1, pathloss, cfg_.scheduler.surplus_fraction);
  m.failed = static_cast<int>(tr.outcomes.failed.size());
  m.surplus = static_cast<int>(tr.outcomes.surplus.size());

  tr.alloc_final = tr.alloc1;
  tr.final_vehicles = tr.lp1_vehicles;
  tr.final_plan = tr.plan1;
  bool reuse_replay = true;
  if (!tr.outcomes.failed.empty() && cfg_.scheduler.mode != SchedulerMode::off) {
    const std::vector<OffloadVehicle>& v1 = tr.lp1_vehicles;
    SlotSnapshot snap;
    snap.vehicles = v1;
    snap.params = params_;
    snap.plan = tr.plan1;
    snap.rate = [&L, &ch, this](int i, LinkKind k, const LinkAllocation& la) {
      const auto u = static_cast<std::size_t>(i);
      if (la.rb_count() == 0) return 0.0;
      if (k == LinkKind::v2i)
        return v2i_rate_bps(la.rb_count(), la.power_dbm, L.pl_v2i[u], scn_.vehicles[u].shadow_db,
                            effective_fading_db(L.gain_v2i[u], la.rbs), ch);
      return L.pl_v2u[u] ? g2a_rate_bps(la.rb_count(), la.power_dbm, *L.pl_v2u[u],
                                        effective_fading_db(L.gain_v2u[u], la.rbs), ch)
                         : 0.0;
    };
    snap.gain = [&L](int i, LinkKind k, int rb) {
      const auto& g = k == LinkKind::v2i ? L.gain_v2i[static_cast<std::size_t>(i)] : L.gain_v2u[static_cast<std::size_t>(i)];
      return g.empty() ? 1.0 : g[static_cast<std::size_t>(rb)];
    };

    mark(Stage::scheduler);
    const std::vector<MacroAction> proposed = scheduler_actions(tr.outcomes, tr.alloc1, snap, out);

    mark(Stage::apply);
    const SchedulerLimits limits{ch.p_min_dbm, ch.p_max_dbm, cfg_.scheduler.max_actions};
    ApplyResult ar = validate_and_apply(proposed, tr.alloc1, limits, snap.gain);
    tr.actions = ar.applied;
    tr.rejected = ar.rejected;
    m.applied = static_cast<int>(ar.applied.size());
    m.rejected = static_cast<int>(ar.rejected.size());

    mark(Stage::lp2);
    std::vector<OffloadVehicle> v2 = lp_inputs(L, ar.allocation, &replay1);
    OffloadPlan plan2 = solve_offload(build_offload_lp(v2, params_));
    if (plan2.ok()) {
      tr.alloc_final = std::move(ar.allocation);
      tr.final_vehicles = std::move(v2);
      tr.final_plan = std::move(plan2);
      tr.lp2_solved = true;
      reuse_replay = false;
    } else {
      std::clog << "[orchestrator] slot " << slot_ << ": LP #2 failed (" << to_string(plan2.status)
                << "), keeping LP #1 plan\n";
    }
  }
  m.objective = tr.final_plan.objective;

  mark(Stage::replay);
  tr.replay = reuse_replay ? replay1 : replay_offload(tr.final_plan, tr.final_vehicles, params_);
  for (const ReplayRecord& r : tr.replay.records)
    history_.record(r.node, scn_.vehicles[static_cast<std::size_t>(r.vehicle)].task_bits, r.delay_s);

  const double c = params_.cycles_per_bit;
  for (std::size_t i = 0; i < M; ++i) {
    const OffloadVehicle& v = tr.final_vehicles[i];
    const OffloadRow& row = tr.final_plan.rows[i];
    if (v.task_bits <= 0.0) continue;
    ++m.tasks;
    const double done = tr.replay.completion_s[i];
    m.delay_sum_s += done;
    m.normalized_delay += done / v.deadline_s;
    m.estimated_delay_sum_s += row.completion_s;
    if (done <= v.deadline_s + 1e-9) ++m.tasks_on_time;
    const double D = v.task_bits;
    double comp = row.gamma_local * params_.local_hz * params_.local_hz;
    if (v.has_bs()) {
      m.energy.comm_j += dbm_to_watt(v.power_v2i_dbm) * row.gamma_bs * D / v.rate_v2i_bps;
      comp += row.gamma_bs * params_.bs_hz * params_.bs_hz;
    }
    if (v.has_uav()) {
      const double f = params_.uav_hz[static_cast<std::size_t>(*v.serving_uav)];
      m.energy.comm_j += dbm_to_watt(v.power_v2u_dbm) * row.gamma_uav * D / v.rate_v2u_bps;
      comp += row.gamma_uav * f * f;
    }
    m.energy.compute_j += params_.kappa * c * D * comp;
  }
  m.success_rate = m.tasks > 0 ? static_cast<double>(m.tasks_on_time) / m.tasks : 1.0;
  m.weighted_energy = m.energy.weighted(cfg_.energy);
  m.bs_admitted_mb = tr.final_plan.bs_admitted_bits / kBitsPerMb;
  for (double b : tr.final_plan.uav_admitted_bits) m.uav_admitted_mb.push_back(b / kBitsPerMb);

  if (train) {
    mark(Stage::store);
    if (pending_) agent_->buffer().push({pending_->state, pending_->action, pending_->reward, tr.state, false});
    pending_ = Pending{tr.state, tr.action, m.reward};

    mark(Stage::update);
    for (int k = 0; k < cfg_.run.updates_per_slot; ++k)
      if (auto st = agent_->train_step()) m.update = st;
  }

  mark(Stage::mobility);
  const std::vector<VehicleState> before = scn_.vehicles;
  scn_.vehicles = step_vehicles(scn_.roads, std::move(scn_.vehicles), dt, mobility_rng_);
  for (std::size_t i = 0; i < M; ++i)
    scn_.vehicles[i].shadow_db =
        update_shadow(before[i].shadow_db, before[i].speed_mps * dt, ch, channel_rng_);
  assign_tasks(scn_.vehicles, cfg_.tasks, task_rng_);
  ++slot_;
  return out;
}

void Simulation::finish_episode() {
  if (pending_) {
    agent_->buffer().push({pending_->state, pending_->action, pending_->reward, pending_->state, true});
    pending_.reset();
  }
  if (cfg_.run.mode == RunMode::train) agent_->end_episode();
}

EpisodeResult run_episode(Simulation& sim, std::uint64_t seed, const SlotSink& sink) {
  sim.reset(seed);
  EpisodeResult r;
  for (int t = 0; t < sim.config().run.slots; ++t) {
    try {
      SlotResult s = sim.run_slot();
      if (sink) sink(s);
      r.metrics.push_back(std::move(s.metrics));
    } catch (const SlotError& e) {
      std::clog << "[orchestrator] episode stopped: " << e.what() << '\n';
      r.aborted = e.what();
      break;
    }
  }
  sim.finish_episode();
  return r;
}

EpisodeSummary summarize(const std::vector<SlotMetrics>& m) {
  EpisodeSummary s;
  if (m.empty()) return s;
  for (const SlotMetrics& x : m) {
    s.mean_objective += x.objective;
    s.mean_reward += x.reward;
    s.mean_success += x.success_rate;
    s.mean_coverage += x.coverage_rt;
    s.mean_delay_s += x.delay_sum_s;
    s.mean_energy_j += x.energy.total();
  }
  const double n = static_cast<double>(m.size());
  s.mean_objective /= n;
  s.mean_reward /= n;
  s.mean_success /= n;
  s.mean_coverage /= n;
  s.mean_delay_s /= n;
  s.mean_energy_j /= n;
  return s;
}

}  // namespace uavmec
