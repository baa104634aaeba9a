#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddac/document.hpp"
#include "ddac/explain.hpp"
#include "ddac/model.hpp"
#include "ddac/service.hpp"
#include "ddac/simulator.hpp"
#include "ddac/validate.hpp"

namespace ddac::cli {

enum ExitStatus : int {
  kOk = 0,
  kStrictWarnings = 1,
  kInputError = 2,
  kDivergence = 3,
  kUsage = 4,
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool color = false;
  // Called once the playground server is bound, before it blocks.
  std::function<void(service::Server&)> on_listening = {};
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RuleSet load_rules(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_ruleset(text);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline Trace load_trace(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_trace(text);
  } catch (const TraceError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline Timeline run_loaded(const RuleSet& rs, const Trace& trace, const std::string& trace_path) {
  try {
    return run_trace(rs, trace);
  } catch (const TraceError& e) {
    throw InputError(trace_path + ": " + e.what());
  }
}

inline int cmd_validate(Context& ctx, const std::string& rules_path, bool strict) {
  RuleSet rs = load_rules(rules_path);
  Style style{ctx.color};
  auto diags = validate_ruleset(rs);
  for (const Diagnostic& d : diags) {
    std::string tag(to_token(d.severity));
    ctx.err << (d.severity == Severity::Warn ? style.bad(tag) : style.dim(tag)) << " " << d.code << ": " << d.message
            << "\n";
  }
  std::size_t warnings = count_warnings(diags);
  ctx.out << "OK, " << warnings << (warnings == 1 ? " warning" : " warnings") << "\n";
  return strict && warnings > 0 ? kStrictWarnings : kOk;
}

inline int cmd_run(Context& ctx, const std::string& rules_path, const std::string& trace_path,
                   const std::string& out_path) {
  RuleSet rs = load_rules(rules_path);
  Trace trace = load_trace(trace_path);
  std::string text = serialize_timeline(run_loaded(rs, trace, trace_path));
  if (out_path.empty() || out_path == "-") {
    ctx.out << text;
    return kOk;
  }
  std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError(out_path + ": cannot open for writing");
  file << text;
  file.flush();
  if (!file) throw InputError(out_path + ": write failed");
  return kOk;
}

inline int cmd_explain(Context& ctx, const std::string& rules_path, const std::string& trace_path, std::int64_t tick,
                       const std::string& channel) {
  std::optional<ChannelKind> only;
  if (!channel.empty()) {
    only = channel_from_token(channel);
    if (!only) {
      ctx.err << "unknown channel \"" << channel << "\" (expected animation, h_flip, v_flip or speed_scale)\n";
      return kUsage;
    }
  }
  RuleSet rs = load_rules(rules_path);
  Trace trace = load_trace(trace_path);
  Timeline tl = run_loaded(rs, trace, trace_path);
  if (tick < 0 || static_cast<std::size_t>(tick) >= tl.entries.size()) {
    ctx.err << "tick " << tick << " out of range (trace has " << tl.entries.size() << " ticks)\n";
    return kUsage;
  }
  explain_tick(ctx.out, rs, tl.entries[static_cast<std::size_t>(tick)], only, Style{ctx.color});
  return kOk;
}

inline Json divergence_json(const Divergence& d) {
  Json j = Json::object();
  j["tick"] = d.tick;
  j["channel"] = std::string(to_token(d.channel));
  j["kind"] = d.kind == Divergence::Kind::Value ? "value" : "winners";
  if (d.kind == Divergence::Kind::Value) {
    j["actual"] = scalar_to_json(d.actual);
    j["expected"] = scalar_to_json(d.expected);
  } else {
    j["actual"] = d.actual_winners;
    j["expected"] = d.expected_winners;
  }
  return j;
}

inline int cmd_diff(Context& ctx, const std::string& rules_path, const std::string& trace_path,
                    const std::string& golden_path, bool strict, bool json) {
  RuleSet rs = load_rules(rules_path);
  Trace trace = load_trace(trace_path);
  Timeline golden;
  try {
    golden = parse_timeline(read_file(golden_path));
  } catch (const TimelineFormatError& e) {
    throw InputError(golden_path + ": " + e.what());
  }
  Timeline actual = run_loaded(rs, trace, trace_path);
  std::vector<Divergence> divs;
  try {
    divs = diff_timeline(actual, golden, strict);
  } catch (const LengthMismatch& e) {
    ctx.err << e.what() << "\n";
    if (json) {
      Json j = Json::object();
      j["length_mismatch"] = {{"actual", e.actual()}, {"expected", e.expected()}};
      ctx.out << j.dump() << "\n";
    }
    return kDivergence;
  }
  Style style{ctx.color};
  if (json) {
    Json arr = Json::array();
    for (const Divergence& d : divs) arr.push_back(divergence_json(d));
    ctx.out << canonical_dump(arr);
  } else {
    for (const Divergence& d : divs) {
      ctx.out << "tick " << d.tick << " " << to_token(d.channel) << ": ";
      if (d.kind == Divergence::Kind::Value) {
        ctx.out << "actual " << style.bad(d.actual.to_display()) << ", expected " << d.expected.to_display();
      } else {
        ctx.out << "winners " << Json(d.actual_winners).dump() << ", expected " << Json(d.expected_winners).dump();
      }
      ctx.out << "\n";
    }
  }
  if (divs.empty()) {
    ctx.err << "timelines match (" << actual.entries.size() << " ticks)\n";
    return kOk;
  }
  ctx.err << divs.size() << (divs.size() == 1 ? " divergence" : " divergences") << "\n";
  return kDivergence;
}

inline int cmd_serve(Context& ctx, const std::string& rules_path, int port, const std::string& bind,
                     const std::string& static_dir) {
  RuleSet rs = load_rules(rules_path);
  service::Session session(std::move(rs));
  service::Server server(session, static_dir);
  bool bound = port == 0 ? server.bind_any(bind) > 0 : server.bind(bind, port);
  if (!bound) {
    ctx.err << "cannot bind " << bind << ":" << port << "\n";
    return kInputError;
  }
  ctx.err << "playground listening on http://" << bind << ":" << server.port() << "/\n";
  if (ctx.on_listening) ctx.on_listening(server);
  server.listen();
  return kOk;
}

// Entry point shared by the ddac binary and the tests. args excludes argv[0].
inline int run(const std::vector<std::string>& args, Context& ctx) {
  CLI::App app{"Data-driven animation controller: validate rule documents, replay traces, explain resolutions"};
  app.name("ddac");
  app.require_subcommand(1);

  std::string rules, trace, out, golden, channel, bind = "127.0.0.1", static_dir;
  bool strict = false, json = false;
  std::int64_t tick = 0;
  int port = service::kDefaultPort;

  auto* validate = app.add_subcommand("validate", "Parse a rule document and report diagnostics");
  validate->add_option("rules", rules, "Rule document")->required();
  validate->add_flag("--strict", strict, "Exit with status 1 on any warning");

  auto* run_cmd = app.add_subcommand("run", "Replay a trace and print the resolved timeline");
  run_cmd->add_option("--rules", rules, "Rule document")->required();
  run_cmd->add_option("--trace", trace, "Trace document")->required();
  run_cmd->add_option("--out", out, "Output path (default: standard output)");

  auto* explain = app.add_subcommand("explain", "Explain how one tick was resolved");
  explain->add_option("--rules", rules, "Rule document")->required();
  explain->add_option("--trace", trace, "Trace document")->required();
  explain->add_option("--tick", tick, "Tick index")->required();
  explain->add_option("--channel", channel, "animation | h_flip | v_flip | speed_scale");

  auto* diff = app.add_subcommand("diff", "Replay a trace and compare against a golden timeline");
  diff->add_option("--rules", rules, "Rule document")->required();
  diff->add_option("--trace", trace, "Trace document")->required();
  diff->add_option("--golden", golden, "Golden timeline")->required();
  diff->add_flag("--strict", strict, "Also compare winner lists");
  diff->add_flag("--json", json, "Print divergences as JSON");

  auto* serve = app.add_subcommand("serve", "Start the playground service");
  serve->add_option("--rules", rules, "Initial rule document")->required();
  serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--bind", bind, "Bind address")->capture_default_str();
  serve->add_option("--static", static_dir, "Directory of built UI assets served at /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    ctx.out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    ctx.err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(ctx, rules, strict);
    if (*run_cmd) return cmd_run(ctx, rules, trace, out);
    if (*explain) return cmd_explain(ctx, rules, trace, tick, channel);
    if (*diff) return cmd_diff(ctx, rules, trace, golden, strict, json);
    if (*serve) return cmd_serve(ctx, rules, port, bind, static_dir);
  } catch (const InputError& e) {
    ctx.err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kUsage;
}

}  // namespace ddac::cli
