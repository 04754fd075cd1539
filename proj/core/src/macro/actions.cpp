#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "uavmec/macro_scheduler.hpp"

namespace uavmec {

using nlohmann::json;

namespace {

std::optional<LinkKind> link_from(const json& j) {
  if (!j.is_string()) return std::nullopt;
  const std::string s = j.get<std::string>();
  if (s == "v2i") return LinkKind::v2i;
  if (s == "v2u") return LinkKind::v2u;
  return std::nullopt;
}

bool is_int(const json& o, const char* key) { return o.contains(key) && o[key].is_number_integer(); }

std::string field_error(std::size_t i, const std::string& msg) {
  return "element " + std::to_string(i) + ": " + msg;
}

// Position one past the bracket matching text[open], honouring JSON strings.
std::optional<std::size_t> matching_close(const std::string& text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') ++depth;
    else if (c == ']' || c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

json action_json(const MacroAction& a) {
  json o;
  if (a.kind == MacroKind::transfer_rb) {
    o["action"] = "transfer_rb";
    o["from_vehicle"] = a.from_vehicle;
    o["from_link"] = std::string(to_string(a.from_link));
    o["to_vehicle"] = a.to_vehicle;
    o["to_link"] = std::string(to_string(a.to_link));
    o["count"] = a.count;
  } else {
    o["action"] = "update_power";
    o["vehicle"] = a.vehicle;
    o["link"] = std::string(to_string(a.link));
    o["power_dbm"] = a.power_dbm;
  }
  return o;
}

}  // namespace

MacroAction MacroAction::transfer(int from_vehicle, LinkKind from_link, int to_vehicle, LinkKind to_link, int count) {
  MacroAction a;
  a.kind = MacroKind::transfer_rb;
  a.from_vehicle = from_vehicle;
  a.from_link = from_link;
  a.to_vehicle = to_vehicle;
  a.to_link = to_link;
  a.count = count;
  return a;
}

MacroAction MacroAction::power(int vehicle, LinkKind link, double power_dbm) {
  MacroAction a;
  a.kind = MacroKind::update_power;
  a.vehicle = vehicle;
  a.link = link;
  a.power_dbm = power_dbm;
  return a;
}

std::string to_json(const MacroAction& a) { return action_json(a).dump(); }

std::string to_json(const std::vector<MacroAction>& actions) {
  json arr = json::array();
  for (const MacroAction& a : actions) arr.push_back(action_json(a));
  return arr.dump();
}

std::optional<ParsedActions> parse_actions(const std::string& text) {
  for (std::size_t open = text.find('['); open != std::string::npos; open = text.find('[', open + 1)) {
    const auto close = matching_close(text, open);
    if (!close) continue;
    const json arr = json::parse(text.begin() + static_cast<std::ptrdiff_t>(open),
                                 text.begin() + static_cast<std::ptrdiff_t>(*close), nullptr, false);
    if (arr.is_discarded() || !arr.is_array()) continue;

    ParsedActions out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& o = arr[i];
      if (!o.is_object() || !o.contains("action") || !o["action"].is_string()) {
        out.skipped.push_back(field_error(i, "not an action object"));
        continue;
      }
      const std::string kind = o["action"].get<std::string>();
      if (kind == "transfer_rb") {
        const auto fl = o.contains("from_link") ? link_from(o["from_link"]) : std::nullopt;
        const auto tl = o.contains("to_link") ? link_from(o["to_link"]) : std::nullopt;
        if (!is_int(o, "from_vehicle") || !is_int(o, "to_vehicle") || !fl || !tl) {
          out.skipped.push_back(field_error(i, "transfer_rb needs from_vehicle, from_link, to_vehicle, to_link"));
          continue;
        }
        int count = 1;
        if (o.contains("count")) {
          if (!o["count"].is_number_integer()) {
            out.skipped.push_back(field_error(i, "count must be an integer"));
            continue;
          }
          count = o["count"].get<int>();
        }
        out.actions.push_back(
            MacroAction::transfer(o["from_vehicle"].get<int>(), *fl, o["to_vehicle"].get<int>(), *tl, count));
      } else if (kind == "update_power") {
        const auto l = o.contains("link") ? link_from(o["link"]) : std::nullopt;
        if (!is_int(o, "vehicle") || !l || !o.contains("power_dbm") || !o["power_dbm"].is_number()) {
          out.skipped.push_back(field_error(i, "update_power needs vehicle, link, power_dbm"));
          continue;
        }
        out.actions.push_back(MacroAction::power(o["vehicle"].get<int>(), *l, o["power_dbm"].get<double>()));
      } else {
        out.skipped.push_back(field_error(i, "unknown action '" + kind + "'"));
      }
    }
    return out;
  }
  return std::nullopt;
}

ApplyResult validate_and_apply(const std::vector<MacroAction>& actions, const ResourceAllocation& alloc,
                               const SchedulerLimits& limits, const RbGain& gain) {
  ApplyResult res;
  res.allocation = alloc;
  ResourceAllocation& a = res.allocation;
  auto reject = [&](const MacroAction& act, std::string why) { res.rejected.push_back({act, std::move(why)}); };

  for (std::size_t n = 0; n < actions.size(); ++n) {
    const MacroAction& act = actions[n];
    if (static_cast<int>(res.applied.size()) >= limits.max_actions) {
      reject(act, "action budget exhausted");
      continue;
    }
    if (act.kind == MacroKind::update_power) {
      const int i = a.index_of(act.vehicle);
      if (i < 0) {
        reject(act, "unknown vehicle");
        continue;
      }
      LinkAllocation& l = a.vehicles[static_cast<std::size_t>(i)].link(act.link);
      if (!l.active) {
        reject(act, "link does not exist");
      } else if (!std::isfinite(act.power_dbm) || act.power_dbm < limits.p_min_dbm ||
                 act.power_dbm > limits.p_max_dbm) {
        reject(act, "power outside bounds");
      } else {
        l.power_dbm = act.power_dbm;
        res.applied.push_back(act);
      }
      continue;
    }

    const int fi = a.index_of(act.from_vehicle), ti = a.index_of(act.to_vehicle);
    if (fi < 0 || ti < 0) {
      reject(act, "unknown vehicle");
      continue;
    }
    if (fi == ti && act.from_link == act.to_link) {
      reject(act, "source and target are the same link");
      continue;
    }
    LinkAllocation& src = a.vehicles[static_cast<std::size_t>(fi)].link(act.from_link);
    LinkAllocation& dst = a.vehicles[static_cast<std::size_t>(ti)].link(act.to_link);
    if (!src.active || !dst.active) {
      reject(act, "link does not exist");
      continue;
    }
    if (act.count < 1) {
      reject(act, "count must be at least 1");
      continue;
    }
    if (src.rb_count() - act.count < 1) {
      reject(act, "source must keep at least one RB");
      continue;
    }
    std::vector<int> order = src.rbs;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      if (gain) {
        const double gx = gain(fi, act.from_link, x), gy = gain(fi, act.from_link, y);
        if (gx != gy) return gx < gy;
      }
      return x > y;
    });
    const std::vector<int> moved(order.begin(), order.begin() + act.count);
    std::erase_if(src.rbs, [&](int rb) { return std::find(moved.begin(), moved.end(), rb) != moved.end(); });
    dst.rbs.insert(dst.rbs.end(), moved.begin(), moved.end());
    std::sort(dst.rbs.begin(), dst.rbs.end());
    dst.dropped = false;
    res.applied.push_back(act);
  }
  return res;
}

}  // namespace uavmec
