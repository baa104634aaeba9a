#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ddac/model.hpp"

namespace ddac {

enum class Severity { Info, Warn };

inline constexpr std::string_view to_token(Severity s) { return s == Severity::Warn ? "WARN" : "INFO"; }

struct Diagnostic {
  Severity severity = Severity::Info;
  std::string code;  // "tie-order-dependent" | "unreachable" | "single-reference"
  ChannelKind channel = ChannelKind::Animation;
  std::vector<std::string> rule_ids;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Non-fatal lint over a parsed rule set. Disabled rules take no part in tie or
// shadowing checks since they never become candidates.
inline std::vector<Diagnostic> validate_ruleset(const RuleSet& rs) {
  std::vector<Diagnostic> out;

  for (ChannelKind kind : kAllChannels) {
    const Channel& ch = rs.channel(kind);
    const std::string channel_name(to_token(kind));

    // Equal-priority rules: when several match together the channel value
    // depends on their array order.
    std::map<std::int64_t, std::vector<std::string>> by_priority;
    for (const Rule& r : ch.rules) {
      if (!r.disabled) by_priority[r.priority].push_back(r.id);
    }
    for (const auto& [priority, ids] : by_priority) {
      if (ids.size() < 2) continue;
      std::string list;
      for (const std::string& id : ids) list += (list.empty() ? "" : ", ") + id;
      out.push_back({Severity::Warn, "tie-order-dependent", kind, ids,
                     channel_name + ": rules " + list + " share priority " + std::to_string(priority) +
                         "; the last matching one in array order sets the value"});
    }

    // A rule with the same condition group as a strictly higher-priority rule
    // can never be a winner.
    for (const Rule& low : ch.rules) {
      if (low.disabled) continue;
      for (const Rule& high : ch.rules) {
        if (high.disabled || high.priority <= low.priority) continue;
        if (high.conditions == low.conditions) {
          out.push_back({Severity::Warn, "unreachable", kind, {low.id},
                         channel_name + ": rule " + low.id + " is shadowed by " + high.id +
                             " (identical conditions, higher priority)"});
          break;
        }
      }
    }
  }

  // Variables referenced by exactly one condition across the rule set are
  // often typos.
  std::map<std::pair<std::string, std::string>, std::pair<int, std::pair<ChannelKind, std::string>>> refs;
  for (ChannelKind kind : kAllChannels) {
    for (const Rule& r : rs.channel(kind).rules) {
      for (const Condition& c : r.conditions.items) {
        auto& entry = refs[{c.source, c.name}];
        if (entry.first++ == 0) entry.second = {kind, r.id};
      }
    }
  }
  for (const auto& [key, entry] : refs) {
    if (entry.first != 1) continue;
    out.push_back({Severity::Info, "single-reference", entry.second.first, {entry.second.second},
                   key.first + "." + key.second + " is referenced only by rule " + entry.second.second});
  }
  return out;
}

inline std::size_t count_warnings(const std::vector<Diagnostic>& diags) {
  std::size_t n = 0;
  for (const Diagnostic& d : diags) n += d.severity == Severity::Warn;
  return n;
}

}  // namespace ddac
