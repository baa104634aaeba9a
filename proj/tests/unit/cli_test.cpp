#include <gtest/gtest.h>

#include <filesystem>
#include <future>
#include <sstream>
#include <thread>

#include "ddac/cli.hpp"
#include "ddac/oracle.hpp"
#include "support/testing.hpp"

namespace ddac {
namespace {

using testing::fixture;

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, std::function<void(service::Server&)> on_listening = {}) {
  std::ostringstream out, err;
  cli::Context ctx{out, err};
  ctx.on_listening = std::move(on_listening);
  int status = cli::run(args, ctx);
  return {status, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ddac_cli_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(CliValidate, MinimalIsOk) {
  Result r = run({"validate", fixture("minimal.rules.json")});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "OK, 0 warnings\n");
}

TEST(CliValidate, TieWarnsAndStrictFails) {
  Result lax = run({"validate", fixture("tie.rules.json")});
  EXPECT_EQ(lax.status, 0);
  EXPECT_NE(lax.err.find("WARN tie-order-dependent"), std::string::npos);
  EXPECT_EQ(lax.out, "OK, 1 warning\n");
  EXPECT_EQ(run({"validate", "--strict", fixture("tie.rules.json")}).status, 1);
}

TEST(CliValidate, MalformedJsonReportsLocation) {
  Result r = run({"validate", fixture("malformed.rules.json")});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("byte "), std::string::npos);
}

TEST(CliValidate, UsageErrors) {
  EXPECT_EQ(run({"validate"}).status, 4);
  EXPECT_EQ(run({}).status, 4);
  EXPECT_EQ(run({"frobnicate"}).status, 4);
  EXPECT_EQ(run({"validate", fixture("does-not-exist.json")}).status, 2);
}

TEST(CliRun, PlatformerTimeline) {
  Result r = run({"run", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json")});
  ASSERT_EQ(r.status, 0) << r.err;
  Timeline tl = parse_timeline(r.out);
  ASSERT_EQ(tl.entries.size(), 3u);
  EXPECT_EQ(tl.entries[0].animation, "idle");
  EXPECT_EQ(tl.entries[1].animation, "run");
  EXPECT_EQ(tl.entries[2].animation, "idle");
  EXPECT_EQ(run({"run", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json")}).out,
            r.out);
}

TEST(CliRun, EmptyTrace) {
  Result r = run({"run", "--rules", fixture("platformer.rules.json"), "--trace", fixture("empty.trace.json")});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "[]\n");
}

TEST(CliRun, WritesOutFile) {
  auto path = temp_path("out.json");
  Result r = run({"run", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json"),
                  "--out", path.string()});
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(parse_timeline(testing::slurp(path.string())).entries.size(), 3u);
  std::filesystem::remove(path);
}

TEST(CliRun, UnwritableOutIsInputError) {
  Result r = run({"run", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json"),
                  "--out", "/nonexistent-dir/sub/out.json"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST(CliRun, BadTraceIsInputError) {
  auto path = temp_path("bad.trace.json");
  std::ofstream(path) << R"({"ticks":[{"set":{"nodot":1}}]})";
  Result r = run({"run", "--rules", fixture("platformer.rules.json"), "--trace", path.string()});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("tick 0"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(CliExplain, ExcludedByPriority) {
  Result r = run({"explain", "--rules", fixture("damaged.rules.json"), "--trace", fixture("damaged.trace.json"), "--tick",
                  "1", "--channel", "animation"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("rule run  priority 1"), std::string::npos);
  EXPECT_NE(r.out.find("excluded by priority"), std::string::npos);
  EXPECT_NE(r.out.find("max priority: 10"), std::string::npos);
  EXPECT_NE(r.out.find("winners: damaged"), std::string::npos);
  EXPECT_NE(r.out.find("value: \"damaged\""), std::string::npos);
  EXPECT_EQ(r.out.find("channel h_flip"), std::string::npos);
}

TEST(CliExplain, DefaultWinner) {
  Result r = run({"explain", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json"),
                  "--tick", "0"});
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("candidates: none"), std::string::npos);
  EXPECT_NE(r.out.find("winners: default"), std::string::npos);
  EXPECT_NE(r.out.find("channel speed_scale"), std::string::npos);
}

TEST(CliExplain, MissingVariableShowsError) {
  Result r = run({"explain", "--rules", fixture("platformer.rules.json"), "--trace", fixture("missing.trace.json"),
                  "--tick", "0", "--channel", "animation"});
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("<missing>"), std::string::npos);
  EXPECT_NE(r.out.find("ERROR(missing)"), std::string::npos);
}

TEST(CliExplain, OutOfRangeAndBadChannel) {
  std::vector<std::string> base = {"explain", "--rules", fixture("platformer.rules.json"), "--trace",
                                   fixture("platformer_3tick.trace.json")};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args).status;
  };
  EXPECT_EQ(with({"--tick", "3"}), 4);
  EXPECT_EQ(with({"--tick", "-1"}), 4);
  EXPECT_EQ(with({"--tick", "0", "--channel", "tint"}), 4);
}

TEST(CliExplain, ColorOnlyWhenEnabled) {
  std::ostringstream out, err;
  cli::Context ctx{out, err, true};
  cli::run({"explain", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json"),
            "--tick", "1"},
           ctx);
  EXPECT_NE(out.str().find("\x1b["), std::string::npos);
  Result plain = run({"explain", "--rules", fixture("platformer.rules.json"), "--trace",
                      fixture("platformer_3tick.trace.json"), "--tick", "1"});
  EXPECT_EQ(plain.out.find("\x1b["), std::string::npos);
}

TEST(CliDiff, MatchingGolden) {
  Result r = run({"diff", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_5tick.trace.json"),
                  "--golden", fixture("platformer_5tick.golden.json"), "--strict"});
  EXPECT_EQ(r.status, 0) << r.out << r.err;
}

// The mutated set carries a "hold" rule that keeps idle while moving right
// away from walls.
// At priority 1 it sits before run in array order so run (last tie winner)
// still sets the value; raising it to 5 flips tick 1 to idle.
TEST(CliDiff, InjectedPriorityChangeDiverges) {
  RuleSet rs = parse_ruleset(testing::slurp(fixture("platformer.rules.json")));
  auto& anim = rs.channel(ChannelKind::Animation).rules;
  anim.insert(anim.begin(), testing::rule("hold", 1, "idle", GroupMode::And,
                                          {testing::prop("direction", ComparisonOp::Eq, 1),
                                           testing::func("is_on_wall", ComparisonOp::Eq, false)}));
  Trace trace = parse_trace(testing::slurp(fixture("platformer_5tick.trace.json")));
  Timeline golden = parse_timeline(testing::slurp(fixture("platformer_5tick.golden.json")));
  ASSERT_TRUE(diff_timeline(run_trace(rs, trace), golden).empty());

  anim.front().priority = 5;
  Blackboard bb;
  for (std::size_t t = 0; t <= 1; ++t) {
    for (const auto& [a, v] : trace.ticks[t].set) bb.set(*parse_address(a), v);
  }
  ASSERT_EQ(oracle::resolve(rs.channel(ChannelKind::Animation), bb.snapshot(1)).value, Scalar("idle"));

  auto path = temp_path("mutated.rules.json");
  std::ofstream(path) << serialize_ruleset(rs);
  Result r = run({"diff", "--rules", path.string(), "--trace", fixture("platformer_5tick.trace.json"), "--golden",
                  fixture("platformer_5tick.golden.json")});
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(r.out, "tick 1 animation: actual \"idle\", expected \"run\"\n");

  Result json = run({"diff", "--rules", path.string(), "--trace", fixture("platformer_5tick.trace.json"), "--golden",
                     fixture("platformer_5tick.golden.json"), "--json"});
  EXPECT_EQ(json.status, 3);
  Json arr = Json::parse(json.out);
  ASSERT_EQ(arr.size(), 1u);
  EXPECT_EQ(arr[0]["tick"], 1);
  EXPECT_EQ(arr[0]["channel"], "animation");
  std::filesystem::remove(path);
}

TEST(CliDiff, MissingGoldenAndLengthMismatch) {
  EXPECT_EQ(run({"diff", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_5tick.trace.json"),
                 "--golden", fixture("nope.json")})
                .status,
            2);
  EXPECT_EQ(run({"diff", "--rules", fixture("platformer.rules.json"), "--trace", fixture("platformer_3tick.trace.json"),
                 "--golden", fixture("platformer_5tick.golden.json")})
                .status,
            3);
}

TEST(CliServe, InvalidRulesFailBeforeBinding) {
  Result r = run({"serve", "--rules", fixture("malformed.rules.json"), "--port", "0"});
  EXPECT_EQ(r.status, 2);
}

TEST(CliServe, PortInUse) {
  service::Session session(RuleSet{});
  service::Server blocker(session);
  int port = blocker.bind_any();
  ASSERT_GT(port, 0);
  Result r = run({"serve", "--rules", fixture("minimal.rules.json"), "--port", std::to_string(port)});
  EXPECT_EQ(r.status, 2);
}

TEST(CliServe, ServesInitialState) {
  std::promise<service::Server*> ready;
  auto fut = ready.get_future();
  std::ostringstream out, err;
  cli::Context ctx{out, err};
  ctx.on_listening = [&](service::Server& s) { ready.set_value(&s); };
  std::thread t([&] { cli::run({"serve", "--rules", fixture("platformer.rules.json"), "--port", "0"}, ctx); });
  service::Server* server = fut.get();
  server->wait_until_ready();
  httplib::Client client("127.0.0.1", server->port());
  auto state = client.Get("/api/state");
  ASSERT_TRUE(state);
  EXPECT_EQ(state->status, 204);
  auto step = client.Post("/api/step", R"({"n":1})", "application/json");
  ASSERT_TRUE(step);
  EXPECT_EQ(step->status, 200);
  auto after = client.Get("/api/state");
  ASSERT_TRUE(after);
  EXPECT_EQ(after->status, 200);
  EXPECT_EQ(Json::parse(after->body)["state"]["animation"], "idle");
  server->stop();
  t.join();
}

}  // namespace
}  // namespace ddac
