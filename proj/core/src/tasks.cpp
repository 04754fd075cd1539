#include "uavmec/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uavmec {

void TaskConfig::validate() const {
  if (levels_mb.empty()) throw ConfigError("tasks.levels_mb must not be empty");
  if (!std::is_sorted(levels_mb.begin(), levels_mb.end()) || levels_mb.front() < 0.0)
    throw ConfigError("tasks.levels_mb must be ascending and nonnegative");
  if (!(deadline_s > 0.0)) throw ConfigError("tasks.deadline_s must be positive");
  if (!(cycles_per_bit > 0.0)) throw ConfigError("tasks.cycles_per_bit must be positive");
  if (!(local_hz > 0.0 && uav_hz > 0.0 && bs_hz > 0.0)) throw ConfigError("tasks: compute frequencies must be positive");
}

std::vector<double> generate_tasks(int num_vehicles, const TaskConfig& cfg, Rng& rng) {
  const auto& lv = cfg.levels_mb;
  const int n_levels = static_cast<int>(lv.size());
  std::vector<int> level(static_cast<std::size_t>(num_vehicles));
  std::uniform_int_distribution<int> pick(0, n_levels - 1);
  for (int& l : level) l = pick(rng);

  if (cfg.total_load_mb >= 0.0 && num_vehicles > 0) {
    if (cfg.total_load_mb > lv.back() * num_vehicles + 1e-9)
      throw ConfigError("tasks.total_load_mb exceeds what the vehicles can carry");
    auto total = [&] {
      double s = 0.0;
      for (int l : level) s += lv[static_cast<std::size_t>(l)];
      return s;
    };
    std::vector<int> cand;
    for (int guard = 0; guard < 100000; ++guard) {
      const double diff = cfg.total_load_mb - total();
      if (std::abs(diff) < 1e-9) break;
      cand.clear();
      for (int i = 0; i < num_vehicles; ++i) {
        const int l = level[static_cast<std::size_t>(i)];
        if (diff > 0 && l + 1 < n_levels && lv[static_cast<std::size_t>(l + 1)] - lv[static_cast<std::size_t>(l)] <= diff + 1e-9)
          cand.push_back(i);
        if (diff < 0 && l > 0 && lv[static_cast<std::size_t>(l)] - lv[static_cast<std::size_t>(l - 1)] <= -diff + 1e-9)
          cand.push_back(i);
      }
      if (cand.empty()) {
        // Only coarse steps remain; move the other way by one fine step to unlock them.
        for (int i = 0; i < num_vehicles; ++i) {
          const int l = level[static_cast<std::size_t>(i)];
          if (diff > 0 && l > 0) cand.push_back(i);
          if (diff < 0 && l + 1 < n_levels) cand.push_back(i);
        }
        if (cand.empty()) throw ConfigError("tasks.total_load_mb cannot be met with the configured levels");
        std::uniform_int_distribution<std::size_t> pc(0, cand.size() - 1);
        int& l = level[static_cast<std::size_t>(cand[pc(rng)])];
        l += diff > 0 ? -1 : 1;
        continue;
      }
      std::uniform_int_distribution<std::size_t> pc(0, cand.size() - 1);
      int& l = level[static_cast<std::size_t>(cand[pc(rng)])];
      l += diff > 0 ? 1 : -1;
    }
    if (std::abs(cfg.total_load_mb - total()) > 1e-9)
      throw ConfigError("tasks.total_load_mb cannot be met with the configured levels");
  }

  std::vector<double> bits;
  bits.reserve(level.size());
  for (int l : level) bits.push_back(lv[static_cast<std::size_t>(l)] * kBitsPerMb);
  return bits;
}

double compute_delay_s(double fraction, double task_bits, double cycles_per_bit, double f_hz) {
  if (!(f_hz > 0.0)) throw DomainError("compute_delay_s: frequency must be positive");
  return fraction * task_bits * cycles_per_bit / f_hz;
}

double tx_delay_s(double fraction, double task_bits, double rate_bps) {
  if (fraction * task_bits <= 0.0) return 0.0;
  if (!(rate_bps > 0.0)) throw InfeasibleLinkError("tx_delay_s: positive payload over a zero-rate link");
  return fraction * task_bits / rate_bps;
}

double capacity_cap_bits(double f_hz, double dt_s, double cycles_per_bit) { return f_hz * dt_s / cycles_per_bit; }

double vehicle_slot_delay(double local_s, double uav_branch_s, double bs_branch_s) {
  return std::max({local_s, uav_branch_s, bs_branch_s, 0.0});
}

QueueState QueueState::fresh(int node, double compute_hz, double cycles_per_bit, double slot_duration_s,
                             double slot_start_s) {
  QueueState q;
  q.node = node;
  q.compute_hz = compute_hz;
  q.cycles_per_bit = cycles_per_bit;
  q.slot_duration_s = slot_duration_s;
  q.slot_start_s = slot_start_s;
  q.last_completion_s = slot_start_s;
  return q;
}

EnqueueResult enqueue(const QueueState& q, double arrival_s, double service_s, double bits) {
  const double cap = q.capacity_bits();
  if (q.admitted_bits + bits > cap * (1.0 + 1e-9) + 1e-6) throw CapacityError("enqueue: slot capacity exceeded");
  EnqueueResult r;
  const double start = std::max(arrival_s, q.last_completion_s);
  r.queue_delay_s = start - arrival_s;
  r.next = q;
  r.next.last_completion_s = start + service_s;
  r.next.admitted_bits = q.admitted_bits + bits;
  return r;
}

std::vector<ReplayRecord> replay_queue(QueueState q, std::vector<Fragment> fragments) {
  std::stable_sort(fragments.begin(), fragments.end(), [](const Fragment& a, const Fragment& b) {
    return a.arrival_s != b.arrival_s ? a.arrival_s < b.arrival_s : a.vehicle < b.vehicle;
  });
  std::vector<ReplayRecord> out;
  out.reserve(fragments.size());
  for (const Fragment& f : fragments) {
    EnqueueResult r = enqueue(q, f.arrival_s, f.service_s, f.bits);
    q = r.next;
    out.push_back({f.vehicle, q.node, f.arrival_s, r.queue_delay_s, f.service_s, q.last_completion_s});
  }
  return out;
}

int load_bucket(double bits, const std::vector<double>& levels_mb) {
  const double mb = bits / kBitsPerMb;
  int best = 0;
  for (int i = 1; i < static_cast<int>(levels_mb.size()); ++i)
    if (std::abs(levels_mb[static_cast<std::size_t>(i)] - mb) < std::abs(levels_mb[static_cast<std::size_t>(best)] - mb))
      best = i;
  return best;
}

void QueueHistory::record(int node, double vehicle_load_bits, double delay_s) {
  data_[{node, load_bucket(vehicle_load_bits, levels_)}].push_back(delay_s);
}

double QueueHistory::mean(int node, double vehicle_load_bits) const {
  auto it = data_.find({node, load_bucket(vehicle_load_bits, levels_)});
  if (it == data_.end() || it->second.empty()) return 0.0;
  return std::accumulate(it->second.begin(), it->second.end(), 0.0) / static_cast<double>(it->second.size());
}

std::size_t QueueHistory::size(int node, double vehicle_load_bits) const {
  auto it = data_.find({node, load_bucket(vehicle_load_bits, levels_)});
  return it == data_.end() ? 0 : it->second.size();
}

double estimate_queue_delay(const QueueHistory& history, int node, double vehicle_load_bits, int iteration,
                            std::optional<double> previous_realized) {
  if (iteration <= 0) return history.mean(node, vehicle_load_bits);
  return previous_realized.value_or(0.0);
}

}  // namespace uavmec
