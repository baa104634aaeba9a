#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddac/scalar.hpp"

namespace ddac {

enum class ComparisonOp { Eq, Ne, Gt, Lt };

// PROPERTY reads a stored variable, FUNCTION reads the latest output of a
// zero-argument observation function.
enum class ValueMode { Property, Function };

enum class GroupMode { And, Or };

enum class ChannelKind { Animation, HFlip, VFlip, SpeedScale };

inline constexpr std::size_t kChannelCount = 4;

inline constexpr std::array<ChannelKind, kChannelCount> kAllChannels = {
    ChannelKind::Animation, ChannelKind::HFlip, ChannelKind::VFlip, ChannelKind::SpeedScale};

inline constexpr std::size_t index_of(ChannelKind kind) { return static_cast<std::size_t>(kind); }

template <typename T>
using ChannelMap = std::array<T, kChannelCount>;

inline constexpr std::string_view to_token(ComparisonOp op) {
  switch (op) {
    case ComparisonOp::Eq: return "eq";
    case ComparisonOp::Ne: return "ne";
    case ComparisonOp::Gt: return "gt";
    case ComparisonOp::Lt: return "lt";
  }
  return "?";
}

inline constexpr std::string_view to_symbol(ComparisonOp op) {
  switch (op) {
    case ComparisonOp::Eq: return "==";
    case ComparisonOp::Ne: return "!=";
    case ComparisonOp::Gt: return ">";
    case ComparisonOp::Lt: return "<";
  }
  return "?";
}

inline constexpr std::string_view to_token(ValueMode mode) {
  return mode == ValueMode::Property ? "property" : "function";
}

inline constexpr std::string_view to_token(GroupMode mode) {
  return mode == GroupMode::And ? "and" : "or";
}

inline constexpr std::string_view to_token(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Animation: return "animation";
    case ChannelKind::HFlip: return "h_flip";
    case ChannelKind::VFlip: return "v_flip";
    case ChannelKind::SpeedScale: return "speed_scale";
  }
  return "?";
}

inline std::optional<ComparisonOp> comparison_op_from_token(std::string_view token) {
  if (token == "eq") return ComparisonOp::Eq;
  if (token == "ne") return ComparisonOp::Ne;
  if (token == "gt") return ComparisonOp::Gt;
  if (token == "lt") return ComparisonOp::Lt;
  return std::nullopt;
}

inline std::optional<ValueMode> value_mode_from_token(std::string_view token) {
  if (token == "property") return ValueMode::Property;
  if (token == "function") return ValueMode::Function;
  return std::nullopt;
}

inline std::optional<GroupMode> group_mode_from_token(std::string_view token) {
  if (token == "and") return GroupMode::And;
  if (token == "or") return GroupMode::Or;
  return std::nullopt;
}

inline std::optional<ChannelKind> channel_from_token(std::string_view token) {
  for (ChannelKind kind : kAllChannels) {
    if (to_token(kind) == token) return kind;
  }
  return std::nullopt;
}

// Value kind every rule and the default of a channel must carry.
inline constexpr ValueKind value_kind_of(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Animation: return ValueKind::Text;
    case ChannelKind::HFlip:
    case ChannelKind::VFlip: return ValueKind::Boolean;
    case ChannelKind::SpeedScale: return ValueKind::Real;
  }
  return ValueKind::Text;
}

// Identifiers used as a condition source or name. '.' separates source from
// name in trace addresses and a trailing "()" marks function mode, so neither
// may appear inside an identifier.
inline bool is_valid_identifier(std::string_view s) {
  return !s.empty() && s.find_first_of(".()") == std::string_view::npos;
}

struct Condition {
  std::string source;
  std::string name;
  ValueMode mode = ValueMode::Property;
  ComparisonOp op = ComparisonOp::Eq;
  Scalar ref;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct ConditionGroup {
  GroupMode mode = GroupMode::And;
  std::vector<Condition> items;  // never empty in a valid rule set

  friend bool operator==(const ConditionGroup&, const ConditionGroup&) = default;
};

// Priority 0 is reserved for the channel default, so user rules start at 1.
struct Rule {
  std::string id;
  std::int64_t priority = 1;
  Scalar value;
  ConditionGroup conditions;
  bool disabled = false;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Channel {
  ChannelKind kind = ChannelKind::Animation;
  Scalar fallback;  // the implicit priority-0, always-true rule
  std::vector<Rule> rules;

  const Rule* find(std::string_view id) const {
    for (const Rule& r : rules) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

  friend bool operator==(const Channel&, const Channel&) = default;
};

inline constexpr std::int64_t kCurrentVersion = 1;

struct RuleSet {
  std::int64_t version = kCurrentVersion;
  ChannelMap<Channel> channels;

  RuleSet() {
    for (ChannelKind kind : kAllChannels) channels[index_of(kind)].kind = kind;
    channel(ChannelKind::Animation).fallback = Scalar("idle");
    channel(ChannelKind::HFlip).fallback = Scalar(false);
    channel(ChannelKind::VFlip).fallback = Scalar(false);
    channel(ChannelKind::SpeedScale).fallback = Scalar(1.0);
  }

  Channel& channel(ChannelKind kind) { return channels[index_of(kind)]; }
  const Channel& channel(ChannelKind kind) const { return channels[index_of(kind)]; }

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

}  // namespace ddac
