#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "uavmec/drl.hpp"

namespace uavmec {

namespace {

double quality(double pathloss_db) { return std::clamp((150.0 - pathloss_db) / 100.0, 0.0, 1.0); }

struct Link {
  int vehicle_index = 0;
  int vehicle = 0;
  LinkKind kind = LinkKind::v2i;
  double weight = 0.0;
  const std::vector<double>* gain = nullptr;
};

// Higher weight first, then lower vehicle id, then V2I before V2U.
bool higher_priority(const Link& a, const Link& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  if (a.vehicle != b.vehicle) return a.vehicle < b.vehicle;
  return a.kind == LinkKind::v2i && b.kind == LinkKind::v2u;
}

}  // namespace

Eigen::VectorXd build_state(const std::vector<VehicleObservation>& obs) {
  Eigen::VectorXd s(4 * static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(4 * i);
    const VehicleObservation& o = obs[i];
    s[k] = std::clamp(o.load_bits / 2e6, 0.0, 1.0);
    s[k + 1] = quality(o.pathloss_v2i_db);
    s[k + 2] = o.pathloss_v2u_db ? quality(*o.pathloss_v2u_db) : 0.0;
    s[k + 3] = o.pathloss_v2u_db ? 1.0 : 0.0;
  }
  return s;
}

std::string_view to_string(LinkKind k) { return k == LinkKind::v2i ? "v2i" : "v2u"; }

int ResourceAllocation::used_rbs() const {
  int n = 0;
  for (const VehicleAllocation& v : vehicles) n += v.v2i.rb_count() + v.v2u.rb_count();
  return n;
}

int ResourceAllocation::index_of(int vehicle) const {
  for (std::size_t i = 0; i < vehicles.size(); ++i)
    if (vehicles[i].vehicle == vehicle) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> check_allocation(const ResourceAllocation& a, double p_min_dbm, double p_max_dbm) {
  std::vector<std::string> errs;
  if (a.used_rbs() > a.total_rbs) errs.push_back("allocated RBs exceed the total");
  std::set<int> seen;
  for (const VehicleAllocation& v : a.vehicles)
    for (LinkKind k : {LinkKind::v2i, LinkKind::v2u}) {
      const LinkAllocation& l = v.link(k);
      const std::string where = "vehicle " + std::to_string(v.vehicle) + " " + std::string(to_string(k));
      for (int rb : l.rbs) {
        if (rb < 0 || rb >= a.total_rbs) errs.push_back(where + ": RB index out of range");
        if (!seen.insert(rb).second) errs.push_back(where + ": RB " + std::to_string(rb) + " assigned twice");
      }
      if (!l.active && l.rb_count() > 0) errs.push_back(where + ": inactive link holds RBs");
      if (l.active && !l.dropped && l.rb_count() < 1) errs.push_back(where + ": active link without an RB");
      if (l.active && (l.power_dbm < p_min_dbm - 1e-12 || l.power_dbm > p_max_dbm + 1e-12))
        errs.push_back(where + ": power outside bounds");
    }
  return errs;
}

ResourceAllocation map_action_to_allocation(const Eigen::VectorXd& action, const std::vector<LinkContext>& links,
                                            const ChannelConfig& channel) {
  if (action.size() != 2 * static_cast<Eigen::Index>(links.size()))
    throw ConfigError("map_action_to_allocation: action size must be twice the vehicle count");
  ResourceAllocation out;
  out.total_rbs = channel.total_rbs();
  const double p_span = channel.p_max_dbm - channel.p_min_dbm;

  std::vector<Link> active;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkContext& c = links[i];
    VehicleAllocation va;
    va.vehicle = c.vehicle;
    const double p = channel.p_min_dbm + std::clamp(action[static_cast<Eigen::Index>(2 * i)], 0.0, 1.0) * p_span;
    const double w = std::max(0.0, action[static_cast<Eigen::Index>(2 * i + 1)]);
    va.v2i.active = c.v2i_active;
    va.v2u.active = c.v2u_active;
    va.v2i.power_dbm = va.v2u.power_dbm = p;
    out.vehicles.push_back(va);
    if (c.v2i_active) active.push_back({static_cast<int>(i), c.vehicle, LinkKind::v2i, w, &c.v2i_gain});
    if (c.v2u_active) active.push_back({static_cast<int>(i), c.vehicle, LinkKind::v2u, w, &c.v2u_gain});
  }
  if (active.empty()) return out;

  const int R = out.total_rbs;
  std::vector<Link> ranked = active;
  std::stable_sort(ranked.begin(), ranked.end(), higher_priority);
  std::vector<int> quota(ranked.size(), 0);

  if (static_cast<int>(ranked.size()) > R) {
    out.overcommitted = true;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      if (static_cast<int>(k) < R) {
        quota[k] = 1;
      } else {
        out.vehicles[static_cast<std::size_t>(ranked[k].vehicle_index)].link(ranked[k].kind).dropped = true;
      }
    }
  } else {
    double total_w = 0.0;
    for (const Link& l : ranked) total_w += l.weight;
    std::vector<double> share(ranked.size());
    for (std::size_t k = 0; k < ranked.size(); ++k)
      share[k] = total_w > 0.0 ? R * ranked[k].weight / total_w : static_cast<double>(R) / ranked.size();
    int used = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      quota[k] = std::max(1, static_cast<int>(std::floor(share[k])));
      used += quota[k];
    }
    // Leftover goes by largest remainder; ties fall to the earlier (higher-priority) link.
    std::vector<std::size_t> by_rem(ranked.size());
    std::iota(by_rem.begin(), by_rem.end(), 0);
    std::stable_sort(by_rem.begin(), by_rem.end(), [&](std::size_t a, std::size_t b) {
      const double ra = share[a] - std::floor(share[a]), rb = share[b] - std::floor(share[b]);
      if (ra != rb) return ra > rb;
      if (ranked[a].vehicle != ranked[b].vehicle) return ranked[a].vehicle < ranked[b].vehicle;
      return ranked[a].kind == LinkKind::v2i && ranked[b].kind == LinkKind::v2u;
    });
    for (std::size_t j = 0; used < R; j = (j + 1) % by_rem.size()) {
      ++quota[by_rem[j]];
      ++used;
    }
    // Minimum-one bumps can overshoot: trim the largest quota, lowest priority first.
    while (used > R) {
      std::size_t big = 0;
      for (std::size_t k = 0; k < quota.size(); ++k)
        if (quota[k] >= quota[big]) big = k;
      --quota[big];
      --used;
    }
  }

  // Greedy indices: each link in priority order takes its best remaining RBs.
  std::vector<bool> taken(static_cast<std::size_t>(R), false);
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (quota[k] == 0) continue;
    const std::vector<double>& g = *ranked[k].gain;
    std::vector<int> free;
    for (int r = 0; r < R; ++r)
      if (!taken[static_cast<std::size_t>(r)]) free.push_back(r);
    std::stable_sort(free.begin(), free.end(), [&](int a, int b) {
      const double ga = g.empty() ? 1.0 : g[static_cast<std::size_t>(a)];
      const double gb = g.empty() ? 1.0 : g[static_cast<std::size_t>(b)];
      return ga > gb;
    });
    LinkAllocation& la = out.vehicles[static_cast<std::size_t>(ranked[k].vehicle_index)].link(ranked[k].kind);
    for (int j = 0; j < quota[k]; ++j) {
      la.rbs.push_back(free[static_cast<std::size_t>(j)]);
      taken[static_cast<std::size_t>(free[static_cast<std::size_t>(j)])] = true;
    }
    std::sort(la.rbs.begin(), la.rbs.end());
  }
  return out;
}

}  // namespace uavmec
