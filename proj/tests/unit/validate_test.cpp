#include <gtest/gtest.h>

#include "ddac/document.hpp"
#include "ddac/validate.hpp"
#include "support/testing.hpp"

namespace ddac {
namespace {

using Op = ComparisonOp;
using testing::prop;
using testing::rule;

std::size_t count_code(const std::vector<Diagnostic>& diags, const std::string& code) {
  std::size_t n = 0;
  for (const Diagnostic& d : diags) n += d.code == code;
  return n;
}

TEST(ValidateRuleset, EmptyRulesetHasNoDiagnostics) { EXPECT_TRUE(validate_ruleset(RuleSet{}).empty()); }

TEST(ValidateRuleset, EqualPriorityAnimationRulesWarnOnce) {
  RuleSet rs = parse_ruleset(testing::slurp(testing::fixture("tie.rules.json")));
  auto diags = validate_ruleset(rs);
  ASSERT_EQ(count_code(diags, "tie-order-dependent"), 1u);
  for (const Diagnostic& d : diags) {
    if (d.code != "tie-order-dependent") continue;
    EXPECT_EQ(d.severity, Severity::Warn);
    EXPECT_EQ(d.channel, ChannelKind::Animation);
    EXPECT_EQ(d.rule_ids, (std::vector<std::string>{"a", "b"}));
  }
  EXPECT_EQ(count_warnings(diags), 1u);
}

TEST(ValidateRuleset, ShadowedRuleIsUnreachable) {
  RuleSet rs;
  rs.channel(ChannelKind::Animation).rules = {
      rule("A", 5, "jump", GroupMode::And, {prop("airborne", Op::Eq, true)}),
      rule("B", 2, "fall", GroupMode::And, {prop("airborne", Op::Eq, true)}),
  };
  auto diags = validate_ruleset(rs);
  ASSERT_EQ(count_code(diags, "unreachable"), 1u);
  for (const Diagnostic& d : diags) {
    if (d.code == "unreachable") {
      EXPECT_EQ(d.rule_ids, std::vector<std::string>{"B"});
    }
  }
}

// Oracle for the shadowing claim: on every assignment of the referenced
// variable, B is never a winner.
TEST(ValidateRuleset, ShadowedRuleNeverWinsOnAnyAssignment) {
  RuleSet rs;
  rs.channel(ChannelKind::Animation).rules = {
      rule("A", 5, "jump", GroupMode::Or, {prop("airborne", Op::Eq, true), prop("v", Op::Gt, 1)}),
      rule("B", 2, "fall", GroupMode::Or, {prop("airborne", Op::Eq, true), prop("v", Op::Gt, 1)}),
  };
  ASSERT_EQ(count_code(validate_ruleset(rs), "unreachable"), 1u);
  for (bool airborne : {false, true}) {
    for (int v : {0, 1, 2, 3}) {
      Blackboard bb;
      bb.set({"player", "airborne", ValueMode::Property}, Scalar(airborne));
      bb.set({"player", "v", ValueMode::Property}, Scalar(v));
      Snapshot s = bb.snapshot(0);
      bool a = false;
      for (const Rule& r : rs.channel(ChannelKind::Animation).rules) {
        bool fires = false;
        for (const Condition& c : r.conditions.items) {
          const Scalar* o = s.find(key_of(c));
          if (c.name == "airborne") fires = fires || (o->as_bool() == c.ref.as_bool());
          else fires = fires || (o->as_int() > c.ref.as_int());
        }
        if (r.id == "A") a = fires;
        else EXPECT_TRUE(!fires || a) << "B could win without A";
      }
    }
  }
}

TEST(ValidateRuleset, DisabledRulesDoNotTieOrShadow) {
  RuleSet rs;
  Rule a = rule("A", 5, "x", GroupMode::And, {prop("f", Op::Eq, true)});
  Rule b = rule("B", 5, "y", GroupMode::And, {prop("f", Op::Eq, true)});
  Rule c = rule("C", 1, "z", GroupMode::And, {prop("f", Op::Eq, true)});
  a.disabled = true;
  b.disabled = true;
  rs.channel(ChannelKind::Animation).rules = {a, b, c};
  EXPECT_EQ(count_warnings(validate_ruleset(rs)), 0u);
}

TEST(ValidateRuleset, SingleReferenceIsInfo) {
  RuleSet rs = testing::platformer_rules();
  auto diags = validate_ruleset(rs);
  EXPECT_EQ(count_warnings(diags), 0u);
  ASSERT_EQ(count_code(diags, "single-reference"), 1u);
  for (const Diagnostic& d : diags) {
    if (d.code != "single-reference") continue;
    EXPECT_EQ(d.severity, Severity::Info);
    EXPECT_EQ(d.rule_ids, std::vector<std::string>{"wall"});
    EXPECT_NE(d.message.find("player.is_on_wall"), std::string::npos);
  }
}

TEST(ValidateRuleset, TiesCheckedPerChannel) {
  RuleSet rs;
  rs.channel(ChannelKind::HFlip).rules = {
      rule("l", 3, true, GroupMode::And, {prop("d", Op::Lt, 0)}),
      rule("r", 3, false, GroupMode::And, {prop("d", Op::Gt, 0)}),
  };
  rs.channel(ChannelKind::Animation).rules = {
      rule("l", 3, "x", GroupMode::And, {prop("d", Op::Lt, 0)}),
  };
  auto diags = validate_ruleset(rs);
  ASSERT_EQ(count_code(diags, "tie-order-dependent"), 1u);
  EXPECT_EQ(diags[0].channel, ChannelKind::HFlip);
}

}  // namespace
}  // namespace ddac
