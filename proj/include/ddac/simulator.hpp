#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ddac/blackboard.hpp"
#include "ddac/document.hpp"
#include "ddac/model.hpp"
#include "ddac/resolver.hpp"

namespace ddac {

struct TickEvent {
  std::vector<std::pair<std::string, Scalar>> set;  // trace address -> value

  friend bool operator==(const TickEvent&, const TickEvent&) = default;
};

struct Trace {
  std::vector<TickEvent> ticks;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct Timeline {
  std::vector<ResolvedState> entries;
};

class TraceError : public std::runtime_error {
 public:
  TraceError(std::optional<std::size_t> tick, std::string address, const std::string& reason)
      : std::runtime_error(describe(tick, address, reason)), tick_(tick), address_(std::move(address)) {}

  std::optional<std::size_t> tick() const { return tick_; }
  const std::string& address() const { return address_; }

 private:
  static std::string describe(std::optional<std::size_t> tick, const std::string& address, const std::string& reason) {
    std::string out = "trace";
    if (tick) out += " tick " + std::to_string(*tick);
    if (!address.empty()) out += " address \"" + address + "\"";
    return out + ": " + reason;
  }

  std::optional<std::size_t> tick_;
  std::string address_;
};

inline Trace trace_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("ticks")) throw TraceError(std::nullopt, "", "expected {\"ticks\": [...]}");
  for (const auto& [key, _] : doc.items()) {
    if (key != "ticks") throw TraceError(std::nullopt, "", "unknown field \"" + key + "\"");
  }
  const Json& ticks = doc["ticks"];
  if (!ticks.is_array()) throw TraceError(std::nullopt, "", "\"ticks\" must be an array");
  Trace trace;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const Json& ev = ticks[i];
    if (!ev.is_object()) throw TraceError(i, "", "tick event must be an object");
    TickEvent event;
    for (const auto& [key, value] : ev.items()) {
      if (key != "set") throw TraceError(i, "", "unknown field \"" + key + "\"");
      if (!value.is_object()) throw TraceError(i, "", "\"set\" must be an object");
      for (const auto& [address, v] : value.items()) {
        try {
          event.set.emplace_back(address, scalar_from_json(v));
        } catch (const ParseError& e) {
          throw TraceError(i, address, e.reason());
        }
      }
    }
    trace.ticks.push_back(std::move(event));
  }
  return trace;
}

inline Trace parse_trace(std::string_view document) {
  Json doc;
  try {
    doc = parse_json_text(document);
  } catch (const ParseError& e) {
    const std::string& loc = e.location();
    static constexpr std::string_view kPrefix = "/ticks/";
    if (e.code() == ParseErrorCode::NonFiniteReal && loc.rfind(kPrefix, 0) == 0) {
      std::size_t slash = loc.find('/', kPrefix.size());
      std::size_t tick = std::stoul(loc.substr(kPrefix.size(), slash - kPrefix.size()));
      std::string address;
      if (slash != std::string::npos && loc.compare(slash, 5, "/set/") == 0) {
        address = Json::json_pointer("/" + loc.substr(slash + 5)).back();
      }
      throw TraceError(tick, address, "value is not finite");
    }
    throw TraceError(std::nullopt, "", e.what());
  }
  return trace_from_json(doc);
}

inline Json trace_to_json(const Trace& trace) {
  Json doc = Json::object();
  doc["ticks"] = Json::array();
  for (const TickEvent& ev : trace.ticks) {
    Json set = Json::object();
    for (const auto& [address, value] : ev.set) set[address] = scalar_to_json(value);
    Json e = Json::object();
    e["set"] = std::move(set);
    doc["ticks"].push_back(std::move(e));
  }
  return doc;
}

// Writes to the blackboard, snapshots, then resolves: a variable written at
// tick t is observed at tick t. Values persist until overwritten.
inline Timeline run_trace(const RuleSet& rs, const Trace& trace) {
  Blackboard bb;
  Timeline out;
  out.entries.reserve(trace.ticks.size());
  for (std::size_t t = 0; t < trace.ticks.size(); ++t) {
    for (const auto& [address, value] : trace.ticks[t].set) {
      auto key = parse_address(address);
      if (!key) throw TraceError(t, address, "malformed address (expected source.name or source.name())");
      try {
        bb.set(*key, value);
      } catch (const NonFiniteValue&) {
        throw TraceError(t, address, "non-finite value");
      }
    }
    const ResolvedState* prev = out.entries.empty() ? nullptr : &out.entries.back();
    out.entries.push_back(resolve_tick(rs, bb.snapshot(static_cast<std::int64_t>(t)), prev));
  }
  return out;
}

inline Json winners_to_json(const ChannelMap<std::vector<std::string>>& winners) {
  Json j = Json::object();
  for (ChannelKind kind : kAllChannels) {
    Json ids = Json::array();
    for (const std::string& id : winners[index_of(kind)]) ids.push_back(id);
    j[std::string(to_token(kind))] = std::move(ids);
  }
  return j;
}

// Timeline entry without traces.
inline Json state_summary_json(const ResolvedState& st) {
  Json j = Json::object();
  j["tick"] = st.tick;
  j["animation"] = st.animation;
  j["h_flip"] = st.h_flip;
  j["v_flip"] = st.v_flip;
  j["speed_scale"] = st.speed_scale;
  j["winners"] = winners_to_json(st.winners);
  j["changed"] = st.changed;
  return j;
}

inline Json cond_trace_json(const CondTrace& c) {
  Json j = Json::object();
  j["index"] = c.index;
  j["observed"] = c.observed ? scalar_to_json(*c.observed) : Json();
  j["outcome"] = std::string(to_token(c.outcome));
  if (c.error) j["error"] = std::string(to_token(*c.error));
  return j;
}

inline Json rule_trace_json(const RuleTrace& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["priority"] = r.priority;
  j["disabled"] = r.disabled;
  j["matched"] = r.matched;
  j["excluded_by_priority"] = r.excluded_by_priority;
  j["conditions"] = Json::array();
  for (const CondTrace& c : r.conditions) j["conditions"].push_back(cond_trace_json(c));
  return j;
}

// Summary plus the full per-rule, per-condition explanation.
inline Json state_full_json(const ResolvedState& st) {
  Json j = state_summary_json(st);
  Json traces = Json::object();
  for (ChannelKind kind : kAllChannels) {
    Json rules = Json::array();
    for (const RuleTrace& r : st.traces[index_of(kind)]) rules.push_back(rule_trace_json(r));
    traces[std::string(to_token(kind))] = std::move(rules);
  }
  j["traces"] = std::move(traces);
  return j;
}

inline Json timeline_to_json(const Timeline& tl) {
  Json arr = Json::array();
  for (const ResolvedState& st : tl.entries) arr.push_back(state_summary_json(st));
  return arr;
}

inline std::string serialize_timeline(const Timeline& tl) { return canonical_dump(timeline_to_json(tl)); }

class TimelineFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a golden timeline. Only channel values, winners, tick and changed are
// restored; traces are not part of the file format.
inline Timeline parse_timeline(std::string_view document) {
  Json arr;
  try {
    arr = parse_json_text(document);
  } catch (const ParseError& e) {
    throw TimelineFormatError(e.what());
  }
  if (!arr.is_array()) throw TimelineFormatError("timeline must be a JSON array");
  Timeline tl;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Json& e = arr[i];
    const std::string at = "timeline entry " + std::to_string(i);
    try {
      ResolvedState st;
      st.tick = e.at("tick").get<std::int64_t>();
      st.animation = e.at("animation").get<std::string>();
      st.h_flip = e.at("h_flip").get<bool>();
      st.v_flip = e.at("v_flip").get<bool>();
      st.speed_scale = e.at("speed_scale").get<double>();
      st.changed = e.value("changed", true);
      if (e.contains("winners")) {
        for (ChannelKind kind : kAllChannels) {
          const std::string token(to_token(kind));
          if (e["winners"].contains(token)) {
            st.winners[index_of(kind)] = e["winners"][token].get<std::vector<std::string>>();
          }
        }
      }
      tl.entries.push_back(std::move(st));
    } catch (const Json::exception& ex) {
      throw TimelineFormatError(at + ": " + ex.what());
    }
  }
  return tl;
}

struct Divergence {
  enum class Kind { Value, Winners };

  std::int64_t tick = 0;
  ChannelKind channel = ChannelKind::Animation;
  Kind kind = Kind::Value;
  Scalar actual;
  Scalar expected;
  std::vector<std::string> actual_winners;
  std::vector<std::string> expected_winners;

  friend bool operator==(const Divergence&, const Divergence&) = default;
};

class LengthMismatch : public std::runtime_error {
 public:
  LengthMismatch(std::size_t actual, std::size_t expected)
      : std::runtime_error("timeline length mismatch: actual " + std::to_string(actual) + " ticks, expected " +
                           std::to_string(expected)),
        actual_(actual),
        expected_(expected) {}

  std::size_t actual() const { return actual_; }
  std::size_t expected() const { return expected_; }

 private:
  std::size_t actual_;
  std::size_t expected_;
};

// Divergences ordered by tick, then channel. Default mode compares channel
// values only; strict mode also compares winner lists.
inline std::vector<Divergence> diff_timeline(const Timeline& actual, const Timeline& expected, bool strict = false) {
  if (actual.entries.size() != expected.entries.size()) {
    throw LengthMismatch(actual.entries.size(), expected.entries.size());
  }
  std::vector<Divergence> out;
  for (std::size_t i = 0; i < actual.entries.size(); ++i) {
    const ResolvedState& a = actual.entries[i];
    const ResolvedState& e = expected.entries[i];
    for (ChannelKind kind : kAllChannels) {
      if (a.value(kind) != e.value(kind)) {
        Divergence d;
        d.tick = a.tick;
        d.channel = kind;
        d.actual = a.value(kind);
        d.expected = e.value(kind);
        out.push_back(std::move(d));
      }
      if (strict && a.winners[index_of(kind)] != e.winners[index_of(kind)]) {
        Divergence d;
        d.tick = a.tick;
        d.channel = kind;
        d.kind = Divergence::Kind::Winners;
        d.actual = a.value(kind);
        d.expected = e.value(kind);
        d.actual_winners = a.winners[index_of(kind)];
        d.expected_winners = e.winners[index_of(kind)];
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace ddac
