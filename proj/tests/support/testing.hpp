#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ddac/blackboard.hpp"
#include "ddac/model.hpp"

namespace ddac::testing {

inline std::string fixture(const std::string& name) { return std::string(DDAC_FIXTURE_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Condition cond(std::string source, std::string name, ValueMode mode, ComparisonOp op, Scalar ref) {
  return Condition{std::move(source), std::move(name), mode, op, std::move(ref)};
}

inline Condition prop(std::string name, ComparisonOp op, Scalar ref) {
  return cond("player", std::move(name), ValueMode::Property, op, std::move(ref));
}

inline Condition func(std::string name, ComparisonOp op, Scalar ref) {
  return cond("player", std::move(name), ValueMode::Function, op, std::move(ref));
}

inline Rule rule(std::string id, std::int64_t priority, Scalar value, GroupMode mode, std::vector<Condition> items) {
  Rule r;
  r.id = std::move(id);
  r.priority = priority;
  r.value = std::move(value);
  r.conditions = ConditionGroup{mode, std::move(items)};
  return r;
}

// The platformer controller: idle by default, run when moving on the floor,
// wall when touching a wall on the floor, face left for negative direction.
inline RuleSet platformer_rules() {
  using Op = ComparisonOp;
  RuleSet rs;
  rs.channel(ChannelKind::Animation).rules = {
      rule("run", 1, "run", GroupMode::And, {prop("direction", Op::Ne, 0), func("is_on_floor", Op::Eq, true)}),
      rule("wall", 2, "wall", GroupMode::And, {func("is_on_floor", Op::Eq, true), func("is_on_wall", Op::Eq, true)}),
  };
  rs.channel(ChannelKind::HFlip).rules = {
      rule("face_left", 1, true, GroupMode::And, {prop("direction", Op::Lt, 0)}),
  };
  return rs;
}

// Random instances over a small closed variable universe. References mix
// kinds so cross-kind errors and missing variables are exercised too.
struct Universe {
  std::vector<VarKey> bools;
  std::vector<VarKey> ints;
  std::vector<VarKey> reals;
  std::vector<VarKey> texts;
  std::int64_t int_range = 3;  // ints take values 0..int_range-1

  static Universe standard() {
    Universe u;
    u.bools = {{"p", "b0", ValueMode::Property}, {"p", "b1", ValueMode::Function}, {"q", "b2", ValueMode::Property}};
    u.ints = {{"p", "i0", ValueMode::Property}, {"q", "i1", ValueMode::Function}};
    u.reals = {{"q", "r0", ValueMode::Property}};
    u.texts = {{"q", "t0", ValueMode::Property}};
    return u;
  }

  std::vector<VarKey> all() const {
    std::vector<VarKey> out = bools;
    out.insert(out.end(), ints.begin(), ints.end());
    out.insert(out.end(), reals.begin(), reals.end());
    out.insert(out.end(), texts.begin(), texts.end());
    return out;
  }
};

struct GenParams {
  std::size_t max_rules = 4;
  std::size_t max_conditions = 2;
  std::int64_t min_priority = 1;
  std::int64_t max_priority = 3;
  double missing_rate = 0.05;   // chance a condition names an unknown variable
  double cross_kind_rate = 0.1;  // chance a reference has an unrelated kind
  double disabled_rate = 0.0;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed, Universe u = Universe::standard()) : rng_(seed), u_(std::move(u)) {}

  std::mt19937_64& rng() { return rng_; }

  std::int64_t uniform(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  Scalar channel_value(ChannelKind kind) {
    switch (kind) {
      case ChannelKind::Animation: return Scalar("anim" + std::to_string(uniform(0, 5)));
      case ChannelKind::HFlip:
      case ChannelKind::VFlip: return Scalar(chance(0.5));
      case ChannelKind::SpeedScale: return Scalar(0.25 * static_cast<double>(uniform(1, 8)));
    }
    return {};
  }

  Scalar random_scalar_any() {
    switch (uniform(0, 3)) {
      case 0: return Scalar(chance(0.5));
      case 1: return Scalar(uniform(-1, u_.int_range));
      case 2: return Scalar(0.5 * static_cast<double>(uniform(-2, 4)));
      default: return Scalar(std::string(uniform(0, 1) ? "a" : "b"));
    }
  }

  Condition condition(const GenParams& p) {
    Condition c;
    c.op = static_cast<ComparisonOp>(uniform(0, 3));
    if (chance(p.missing_rate)) {
      c.source = "ghost";
      c.name = "nothing";
      c.ref = Scalar(0);
      return c;
    }
    auto vars = u_.all();
    const VarKey& k = vars[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(vars.size()) - 1))];
    c.source = k.source;
    c.name = k.name;
    c.mode = k.mode;
    if (chance(p.cross_kind_rate)) {
      c.ref = random_scalar_any();
    } else if (contains(u_.bools, k)) {
      c.ref = chance(0.8) ? Scalar(chance(0.5)) : Scalar(uniform(0, 1));
    } else if (contains(u_.ints, k)) {
      c.ref = Scalar(uniform(0, u_.int_range - 1));
    } else if (contains(u_.reals, k)) {
      c.ref = Scalar(0.5 * static_cast<double>(uniform(-2, 4)));
    } else {
      c.ref = Scalar(std::string(chance(0.5) ? "a" : "b"));
    }
    return c;
  }

  Channel channel(ChannelKind kind, const GenParams& p) {
    Channel ch;
    ch.kind = kind;
    ch.fallback = channel_value(kind);
    auto n = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(p.max_rules)));
    for (std::size_t i = 0; i < n; ++i) {
      Rule r;
      r.id = "r" + std::to_string(i);
      r.priority = uniform(p.min_priority, p.max_priority);
      r.value = channel_value(kind);
      r.disabled = chance(p.disabled_rate);
      r.conditions.mode = chance(0.5) ? GroupMode::And : GroupMode::Or;
      auto nc = static_cast<std::size_t>(uniform(1, static_cast<std::int64_t>(p.max_conditions)));
      for (std::size_t j = 0; j < nc; ++j) r.conditions.items.push_back(condition(p));
      ch.rules.push_back(std::move(r));
    }
    return ch;
  }

  RuleSet ruleset(const GenParams& p) {
    RuleSet rs;
    for (ChannelKind kind : kAllChannels) rs.channel(kind) = channel(kind, p);
    return rs;
  }

  // Every universe variable set to a kind-appropriate random value; with
  // `sparse`, some variables are left out.
  Blackboard blackboard(bool sparse = false) {
    Blackboard bb;
    for (const VarKey& k : u_.bools) {
      if (!sparse || !chance(0.2)) bb.set(k, Scalar(chance(0.5)));
    }
    for (const VarKey& k : u_.ints) {
      if (!sparse || !chance(0.2)) bb.set(k, Scalar(uniform(0, u_.int_range - 1)));
    }
    for (const VarKey& k : u_.reals) {
      if (!sparse || !chance(0.2)) bb.set(k, Scalar(0.5 * static_cast<double>(uniform(-2, 4))));
    }
    for (const VarKey& k : u_.texts) {
      if (!sparse || !chance(0.2)) bb.set(k, Scalar(std::string(chance(0.5) ? "a" : "b")));
    }
    return bb;
  }

  const Universe& universe() const { return u_; }

 private:
  static bool contains(const std::vector<VarKey>& keys, const VarKey& k) {
    for (const VarKey& x : keys) {
      if (x == k) return true;
    }
    return false;
  }

  std::mt19937_64 rng_;
  Universe u_;
};

}  // namespace ddac::testing
