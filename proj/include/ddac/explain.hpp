#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "ddac/model.hpp"
#include "ddac/resolver.hpp"

namespace ddac {

struct Style {
  bool color = false;

  std::string paint(std::string_view text, std::string_view code) const {
    if (!color) return std::string(text);
    return "\x1b[" + std::string(code) + "m" + std::string(text) + "\x1b[0m";
  }
  std::string good(std::string_view t) const { return paint(t, "32"); }
  std::string bad(std::string_view t) const { return paint(t, "31"); }
  std::string dim(std::string_view t) const { return paint(t, "2"); }
  std::string bold(std::string_view t) const { return paint(t, "1"); }
};

inline std::string describe_condition(const Condition& c) {
  std::string lhs = c.source + "." + c.name + (c.mode == ValueMode::Function ? "()" : "");
  return lhs + " " + std::string(to_symbol(c.op)) + " " + c.ref.to_display();
}

inline std::string describe_outcome(const CondTrace& t, const Style& style) {
  switch (t.outcome) {
    case Outcome::True: return style.good("TRUE");
    case Outcome::False: return style.dim("FALSE");
    case Outcome::Error:
      return style.bad("ERROR(" + std::string(t.error ? to_token(*t.error) : "unknown") + ")");
  }
  return {};
}

// Human-readable account of how one channel was resolved at one tick.
inline void explain_channel(std::ostream& os, const Channel& ch, const ResolvedState& st, const Style& style) {
  const auto& traces = st.traces[index_of(ch.kind)];
  const auto& winners = st.winners[index_of(ch.kind)];
  os << style.bold("channel " + std::string(to_token(ch.kind))) << "\n";

  std::string candidates;
  std::optional<std::int64_t> top;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const RuleTrace& rt = traces[i];
    const Rule& rule = ch.rules[i];
    std::string status;
    if (rt.disabled) {
      status = style.dim("disabled");
    } else if (!rt.matched) {
      status = style.dim("not matched");
    } else if (rt.excluded_by_priority) {
      status = style.bad("matched, excluded by priority");
    } else {
      status = style.good("matched, winner");
    }
    os << "  rule " << rt.id << "  priority " << rt.priority << "  value " << rule.value.to_display() << "  ["
       << to_token(rule.conditions.mode) << "]  " << status << "\n";
    for (const CondTrace& ct : rt.conditions) {
      os << "    [" << ct.index << "] " << describe_condition(rule.conditions.items[ct.index]) << "  observed "
         << (ct.observed ? ct.observed->to_display() : std::string("<missing>")) << "  -> "
         << describe_outcome(ct, style) << "\n";
    }
    if (rt.matched) {
      candidates += (candidates.empty() ? "" : ", ") + rt.id;
      if (!top || rt.priority > *top) top = rt.priority;
    }
  }

  os << "  candidates: " << (candidates.empty() ? "none" : candidates) << "\n";
  os << "  max priority: " << (top ? std::to_string(*top) : std::string("-")) << "\n";
  if (winners.empty()) {
    os << "  winners: default\n";
    os << "  value: " << st.value(ch.kind).to_display() << " (default)\n";
  } else {
    std::string list;
    for (const std::string& id : winners) list += (list.empty() ? "" : ", ") + id;
    os << "  winners: " << list << "\n";
    os << "  value: " << st.value(ch.kind).to_display();
    if (winners.size() > 1) os << " (last tied winner: " << winners.back() << ")";
    os << "\n";
  }
}

inline void explain_tick(std::ostream& os, const RuleSet& rs, const ResolvedState& st,
                         std::optional<ChannelKind> only, const Style& style) {
  os << style.bold("tick " + std::to_string(st.tick)) << (st.changed ? "  (changed)" : "  (unchanged)") << "\n";
  for (ChannelKind kind : kAllChannels) {
    if (only && *only != kind) continue;
    explain_channel(os, rs.channel(kind), st, style);
  }
}

}  // namespace ddac
