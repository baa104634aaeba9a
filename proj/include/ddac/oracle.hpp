#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ddac/blackboard.hpp"
#include "ddac/model.hpp"

// Brute-force reference resolver for differential testing. It deliberately
// shares no comparison or selection code with resolver.hpp: every rule is
// evaluated naively, matches are stably sorted by (priority desc, index asc)
// and the maximal-priority prefix is taken.
namespace ddac::oracle {

struct Result {
  Scalar value;
  std::vector<std::string> winners;

  friend bool operator==(const Result&, const Result&) = default;
};

// nullopt = comparison error (missing, ordering on text, incomparable kinds).
inline std::optional<bool> check(const std::optional<Scalar>& observed, ComparisonOp op, const Scalar& ref) {
  if (!observed) return std::nullopt;

  // Three-way comparison or nullopt when the pair is unordered; the flag
  // says whether only equality is meaningful.
  struct Cmp {
    std::optional<std::partial_ordering> order;
    bool equality_only = false;
  };

  Cmp cmp = std::visit(
      [](const auto& a, const auto& b) -> Cmp {
        using A = std::decay_t<decltype(a)>;
        using B = std::decay_t<decltype(b)>;
        constexpr bool a_text = std::is_same_v<A, std::string>;
        constexpr bool b_text = std::is_same_v<B, std::string>;
        if constexpr (a_text && b_text) {
          return {a <=> b, true};
        } else if constexpr (a_text || b_text) {
          return {std::nullopt, true};
        } else {
          // any real operand: compare as double; otherwise exact integers
          if constexpr (std::is_floating_point_v<A> || std::is_floating_point_v<B>) {
            return {static_cast<double>(a) <=> static_cast<double>(b), false};
          } else {
            return {static_cast<std::int64_t>(a) <=> static_cast<std::int64_t>(b), false};
          }
        }
      },
      observed->storage(), ref.storage());

  const bool ordering = op == ComparisonOp::Gt || op == ComparisonOp::Lt;
  if (ordering && cmp.equality_only) return std::nullopt;
  if (!cmp.order) return std::nullopt;
  const std::partial_ordering o = *cmp.order;
  switch (op) {
    case ComparisonOp::Eq: return o == std::partial_ordering::equivalent;
    case ComparisonOp::Ne: return o != std::partial_ordering::equivalent;
    case ComparisonOp::Gt: return o == std::partial_ordering::greater;
    case ComparisonOp::Lt: return o == std::partial_ordering::less;
  }
  return std::nullopt;
}

inline bool rule_fires(const Rule& rule, const Snapshot& s) {
  if (rule.disabled) return false;
  std::vector<std::optional<bool>> outcomes;
  for (const Condition& c : rule.conditions.items) {
    outcomes.push_back(check(s.read(VarKey{c.source, c.name, c.mode}), c.op, c.ref));
  }
  for (const auto& o : outcomes) {
    if (!o) return false;
  }
  if (rule.conditions.mode == GroupMode::And) {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return *o; });
  }
  return std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return *o; });
}

inline Result resolve(const Channel& ch, const Snapshot& s) {
  struct Match {
    std::size_t index;
    std::int64_t priority;
  };
  std::vector<Match> matched;
  for (std::size_t i = 0; i < ch.rules.size(); ++i) {
    if (rule_fires(ch.rules[i], s)) matched.push_back({i, ch.rules[i].priority});
  }
  if (matched.empty()) return {ch.fallback, {}};

  std::stable_sort(matched.begin(), matched.end(),
                   [](const Match& a, const Match& b) { return a.priority > b.priority; });
  Result out;
  std::size_t last_index = 0;
  for (const Match& m : matched) {
    if (m.priority != matched.front().priority) break;
    out.winners.push_back(ch.rules[m.index].id);
    last_index = std::max(last_index, m.index);
  }
  out.value = ch.rules[last_index].value;
  return out;
}

}  // namespace ddac::oracle
