#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddac/blackboard.hpp"
#include "ddac/model.hpp"
#include "ddac/scalar.hpp"

namespace ddac {

enum class Outcome { True, False, Error };

enum class EvalError { Missing, OrderingOnText, TypeMismatch };

inline constexpr std::string_view to_token(Outcome o) {
  switch (o) {
    case Outcome::True: return "true";
    case Outcome::False: return "false";
    case Outcome::Error: return "error";
  }
  return "?";
}

inline constexpr std::string_view to_token(EvalError e) {
  switch (e) {
    case EvalError::Missing: return "missing";
    case EvalError::OrderingOnText: return "ordering-on-text";
    case EvalError::TypeMismatch: return "type-mismatch";
  }
  return "?";
}

struct ConditionResult {
  Outcome outcome = Outcome::False;
  std::optional<EvalError> error;  // present iff outcome == Error

  static ConditionResult of(bool b) { return {b ? Outcome::True : Outcome::False, std::nullopt}; }
  static ConditionResult fail(EvalError e) { return {Outcome::Error, e}; }

  friend bool operator==(const ConditionResult&, const ConditionResult&) = default;
};

struct CondTrace {
  std::size_t index = 0;
  std::optional<Scalar> observed;  // nullopt = variable missing
  Outcome outcome = Outcome::False;
  std::optional<EvalError> error;

  friend bool operator==(const CondTrace&, const CondTrace&) = default;
};

struct RuleTrace {
  std::string id;
  std::int64_t priority = 0;
  bool disabled = false;
  bool matched = false;  // candidate: group matched and rule enabled
  bool excluded_by_priority = false;
  std::vector<CondTrace> conditions;

  friend bool operator==(const RuleTrace&, const RuleTrace&) = default;
};

struct GroupResult {
  bool matched = false;
  std::vector<CondTrace> traces;
};

struct ChannelResolution {
  Scalar value;
  std::vector<std::string> winners;  // empty: the default supplied the value
  std::vector<RuleTrace> traces;
};

struct ResolvedState {
  std::int64_t tick = 0;
  std::string animation;
  bool h_flip = false;
  bool v_flip = false;
  double speed_scale = 1.0;
  ChannelMap<std::vector<std::string>> winners;
  bool changed = true;
  ChannelMap<std::vector<RuleTrace>> traces;

  Scalar value(ChannelKind kind) const {
    switch (kind) {
      case ChannelKind::Animation: return Scalar(animation);
      case ChannelKind::HFlip: return Scalar(h_flip);
      case ChannelKind::VFlip: return Scalar(v_flip);
      case ChannelKind::SpeedScale: return Scalar(speed_scale);
    }
    return {};
  }

  bool same_values(const ResolvedState& other) const {
    return animation == other.animation && h_flip == other.h_flip && v_flip == other.v_flip &&
           speed_scale == other.speed_scale;
  }

  friend bool operator==(const ResolvedState&, const ResolvedState&) = default;
};

namespace detail {

// Numeric view of a scalar for mixed comparisons: booleans count as 0/1.
// Integers stay exact; only int<->real pairs widen to double.
inline bool numeric_like(const Scalar& s) { return s.is_numeric() || s.is_bool(); }

inline std::int64_t as_integer(const Scalar& s) { return s.is_bool() ? (s.as_bool() ? 1 : 0) : s.as_int(); }

inline double as_double(const Scalar& s) {
  if (s.is_real()) return s.as_real();
  return static_cast<double>(as_integer(s));
}

// -1, 0, 1 for numeric_like operands.
inline int numeric_compare(const Scalar& lhs, const Scalar& rhs) {
  if (!lhs.is_real() && !rhs.is_real()) {
    std::int64_t a = as_integer(lhs), b = as_integer(rhs);
    return (a > b) - (a < b);
  }
  double a = as_double(lhs), b = as_double(rhs);
  return (a > b) - (a < b);
}

}  // namespace detail

// Compare an observed value against a condition's reference value.
//   numbers and booleans compare numerically (bool as 0/1, int/real widened);
//   text compares with eq/ne only, byte-wise;
//   ordering with a text operand and any other cross-kind pair is an error.
inline ConditionResult compare(const Scalar& observed, ComparisonOp op, const Scalar& ref) {
  if (observed.is_text() || ref.is_text()) {
    if (op == ComparisonOp::Gt || op == ComparisonOp::Lt) return ConditionResult::fail(EvalError::OrderingOnText);
    if (!observed.is_text() || !ref.is_text()) return ConditionResult::fail(EvalError::TypeMismatch);
    bool equal = observed.as_text() == ref.as_text();
    return ConditionResult::of(op == ComparisonOp::Eq ? equal : !equal);
  }
  if (!detail::numeric_like(observed) || !detail::numeric_like(ref)) {
    return ConditionResult::fail(EvalError::TypeMismatch);
  }
  int cmp = detail::numeric_compare(observed, ref);
  switch (op) {
    case ComparisonOp::Eq: return ConditionResult::of(cmp == 0);
    case ComparisonOp::Ne: return ConditionResult::of(cmp != 0);
    case ComparisonOp::Gt: return ConditionResult::of(cmp > 0);
    case ComparisonOp::Lt: return ConditionResult::of(cmp < 0);
  }
  return ConditionResult::fail(EvalError::TypeMismatch);
}

inline ConditionResult eval_condition(const Condition& c, const Snapshot& s) {
  const Scalar* observed = s.find(key_of(c));
  if (!observed) return ConditionResult::fail(EvalError::Missing);
  return compare(*observed, c.op, c.ref);
}

// Evaluates every item (no short-circuit) so traces are always complete. Any
// error outcome makes the group fail, under OR as well as AND.
inline GroupResult eval_group(const ConditionGroup& g, const Snapshot& s) {
  GroupResult out;
  out.traces.reserve(g.items.size());
  bool any_true = false, all_true = true, any_error = false;
  for (std::size_t i = 0; i < g.items.size(); ++i) {
    const Condition& c = g.items[i];
    const Scalar* observed = s.find(key_of(c));
    ConditionResult r = observed ? compare(*observed, c.op, c.ref) : ConditionResult::fail(EvalError::Missing);
    any_true = any_true || r.outcome == Outcome::True;
    all_true = all_true && r.outcome == Outcome::True;
    any_error = any_error || r.outcome == Outcome::Error;
    out.traces.push_back({i, observed ? std::optional<Scalar>(*observed) : std::nullopt, r.outcome, r.error});
  }
  if (any_error) out.matched = false;
  else out.matched = g.mode == GroupMode::And ? all_true : any_true;
  return out;
}

// Prioritized resolution with mutual exclusion: matching rules become
// candidates, only candidates at the highest candidate priority survive, and
// all survivors win. One channel holds one value, so among tied winners the
// last in array order supplies it. No candidates means the default applies.
inline ChannelResolution resolve_channel(const Channel& ch, const Snapshot& s) {
  ChannelResolution out;
  out.traces.reserve(ch.rules.size());
  std::optional<std::int64_t> top;
  for (const Rule& rule : ch.rules) {
    GroupResult g = eval_group(rule.conditions, s);
    RuleTrace t;
    t.id = rule.id;
    t.priority = rule.priority;
    t.disabled = rule.disabled;
    t.matched = g.matched && !rule.disabled;
    t.conditions = std::move(g.traces);
    if (t.matched && (!top || rule.priority > *top)) top = rule.priority;
    out.traces.push_back(std::move(t));
  }

  if (!top) {
    out.value = ch.fallback;
    return out;
  }

  const Rule* last = nullptr;
  for (std::size_t i = 0; i < ch.rules.size(); ++i) {
    RuleTrace& t = out.traces[i];
    if (!t.matched) continue;
    if (t.priority == *top) {
      out.winners.push_back(t.id);
      last = &ch.rules[i];
    } else {
      t.excluded_by_priority = true;
    }
  }
  out.value = last->value;
  return out;
}

// Resolves all four channels against one snapshot. `changed` compares channel
// values with the previous tick only; an unchanged animation is not a restart.
inline ResolvedState resolve_tick(const RuleSet& rs, const Snapshot& s, const ResolvedState* prev = nullptr) {
  ResolvedState st;
  st.tick = s.tick();
  for (ChannelKind kind : kAllChannels) {
    ChannelResolution r = resolve_channel(rs.channel(kind), s);
    switch (kind) {
      case ChannelKind::Animation: st.animation = r.value.as_text(); break;
      case ChannelKind::HFlip: st.h_flip = r.value.as_bool(); break;
      case ChannelKind::VFlip: st.v_flip = r.value.as_bool(); break;
      case ChannelKind::SpeedScale: st.speed_scale = r.value.as_real(); break;
    }
    st.winners[index_of(kind)] = std::move(r.winners);
    st.traces[index_of(kind)] = std::move(r.traces);
  }
  st.changed = prev == nullptr || !st.same_values(*prev);
  return st;
}

inline ResolvedState resolve_tick(const RuleSet& rs, const Snapshot& s, const std::optional<ResolvedState>& prev) {
  return resolve_tick(rs, s, prev ? &*prev : nullptr);
}

}  // namespace ddac
