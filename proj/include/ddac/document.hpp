#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ddac/model.hpp"
#include "ddac/scalar.hpp"

namespace ddac {

using Json = nlohmann::ordered_json;

enum class ParseErrorCode {
  Syntax,
  UnsupportedVersion,
  UnknownField,
  MissingField,
  MissingChannel,
  WrongType,
  DuplicateRuleId,
  ReservedPriority,
  NegativePriority,
  ValueKindMismatch,
  NonPositiveSpeed,
  EmptyConditionGroup,
  NonFiniteReal,
  UnknownEnumToken,
  InvalidIdentifier,
};

inline constexpr std::string_view to_token(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::Syntax: return "syntax";
    case ParseErrorCode::UnsupportedVersion: return "unsupported-version";
    case ParseErrorCode::UnknownField: return "unknown-field";
    case ParseErrorCode::MissingField: return "missing-field";
    case ParseErrorCode::MissingChannel: return "missing-channel";
    case ParseErrorCode::WrongType: return "wrong-type";
    case ParseErrorCode::DuplicateRuleId: return "duplicate-rule-id";
    case ParseErrorCode::ReservedPriority: return "reserved-priority";
    case ParseErrorCode::NegativePriority: return "negative-priority";
    case ParseErrorCode::ValueKindMismatch: return "value-kind-mismatch";
    case ParseErrorCode::NonPositiveSpeed: return "non-positive-speed";
    case ParseErrorCode::EmptyConditionGroup: return "empty-condition-group";
    case ParseErrorCode::NonFiniteReal: return "non-finite-real";
    case ParseErrorCode::UnknownEnumToken: return "unknown-enum-token";
    case ParseErrorCode::InvalidIdentifier: return "invalid-identifier";
  }
  return "?";
}

// Rejection of a rule document. `location` is a JSON pointer into the
// document, or "byte N" for syntax errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorCode code, std::string location, const std::string& reason)
      : std::runtime_error(location + ": " + std::string(to_token(code)) + ": " + reason),
        code_(code),
        location_(std::move(location)),
        reason_(reason) {}

  ParseErrorCode code() const { return code_; }
  const std::string& location() const { return location_; }
  const std::string& reason() const { return reason_; }

 private:
  ParseErrorCode code_;
  std::string location_;
  std::string reason_;
};

namespace detail {

inline std::string pointer_escape(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

inline std::string child(const std::string& at, std::string_view key) {
  return at + "/" + pointer_escape(key);
}

inline std::string child(const std::string& at, std::size_t index) {
  return at + "/" + std::to_string(index);
}

inline std::string_view type_name(const Json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

inline const Json& expect_object(const Json& j, const std::string& at,
                                 std::initializer_list<std::string_view> required,
                                 std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) {
    throw ParseError(ParseErrorCode::WrongType, at,
                     "expected object, found " + std::string(type_name(j)));
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view k : required) known = known || key == k;
    for (std::string_view k : optional) known = known || key == k;
    if (!known) throw ParseError(ParseErrorCode::UnknownField, child(at, key), "unknown field \"" + key + "\"");
  }
  for (std::string_view k : required) {
    if (!j.contains(k)) {
      throw ParseError(ParseErrorCode::MissingField, child(at, k),
                       "missing field \"" + std::string(k) + "\"");
    }
  }
  return j;
}

inline const std::string& expect_string(const Json& j, const std::string& at) {
  if (!j.is_string()) {
    throw ParseError(ParseErrorCode::WrongType, at, "expected string, found " + std::string(type_name(j)));
  }
  return j.get_ref<const std::string&>();
}

inline std::int64_t expect_integer(const Json& j, const std::string& at) {
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw ParseError(ParseErrorCode::WrongType, at, "integer out of range");
    }
    return static_cast<std::int64_t>(v);
  }
  if (j.is_number_integer()) return j.get<std::int64_t>();
  throw ParseError(ParseErrorCode::WrongType, at, "expected integer, found " + std::string(type_name(j)));
}

inline std::string expect_identifier(const Json& j, const std::string& at) {
  const std::string& s = expect_string(j, at);
  if (!is_valid_identifier(s)) {
    throw ParseError(ParseErrorCode::InvalidIdentifier, at,
                     "identifier must be nonempty and contain no '.', '(' or ')'");
  }
  return s;
}

}  // namespace detail

// JSON number/bool/string -> Scalar. Integers and reals are told apart by
// the JSON token itself: 1 is an integer, 1.0 and 1e0 are reals.
inline Scalar scalar_from_json(const Json& j, const std::string& at = "") {
  if (j.is_boolean()) return Scalar(j.get<bool>());
  if (j.is_number_integer() || j.is_number_unsigned()) return Scalar(detail::expect_integer(j, at));
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(ParseErrorCode::NonFiniteReal, at, "real value is not finite");
    return Scalar(v);
  }
  if (j.is_string()) return Scalar(j.get<std::string>());
  throw ParseError(ParseErrorCode::WrongType, at,
                   "expected boolean, number or string, found " + std::string(detail::type_name(j)));
}

inline Json scalar_to_json(const Scalar& s) {
  switch (s.kind()) {
    case ValueKind::Boolean: return Json(s.as_bool());
    case ValueKind::Integer: return Json(s.as_int());
    case ValueKind::Real: return Json(s.as_real());
    case ValueKind::Text: return Json(s.as_text());
  }
  return Json();
}

namespace detail {

template <typename E>
E expect_token(const Json& j, const std::string& at, std::optional<E> (*decode)(std::string_view),
               std::string_view what) {
  const std::string& token = expect_string(j, at);
  if (auto v = decode(token)) return *v;
  throw ParseError(ParseErrorCode::UnknownEnumToken, at,
                   "unknown " + std::string(what) + " \"" + token + "\"");
}

// Channel-typed value check shared by rule values and defaults.
inline Scalar channel_value(const Json& j, ChannelKind kind, const std::string& at) {
  Scalar v = scalar_from_json(j, at);
  ValueKind want = value_kind_of(kind);
  if (v.kind() != want) {
    throw ParseError(ParseErrorCode::ValueKindMismatch, at,
                     std::string(to_token(kind)) + " values must be " + std::string(to_token(want)) +
                         ", found " + std::string(to_token(v.kind())));
  }
  if (kind == ChannelKind::SpeedScale && !(v.as_real() > 0.0)) {
    throw ParseError(ParseErrorCode::NonPositiveSpeed, at, "speed_scale values must be > 0");
  }
  if (kind == ChannelKind::Animation && v.as_text().empty()) {
    throw ParseError(ParseErrorCode::ValueKindMismatch, at, "animation names must be nonempty");
  }
  return v;
}

inline Condition parse_condition(const Json& j, const std::string& at) {
  expect_object(j, at, {"source", "name", "kind", "op", "ref"});
  Condition c;
  c.source = expect_identifier(j["source"], child(at, "source"));
  c.name = expect_identifier(j["name"], child(at, "name"));
  c.mode = expect_token<ValueMode>(j["kind"], child(at, "kind"), value_mode_from_token, "value mode");
  c.op = expect_token<ComparisonOp>(j["op"], child(at, "op"), comparison_op_from_token, "comparison op");
  c.ref = scalar_from_json(j["ref"], child(at, "ref"));
  return c;
}

inline ConditionGroup parse_group(const Json& j, const std::string& at) {
  expect_object(j, at, {"mode", "items"});
  ConditionGroup g;
  g.mode = expect_token<GroupMode>(j["mode"], child(at, "mode"), group_mode_from_token, "group mode");
  const Json& items = j["items"];
  const std::string items_at = child(at, "items");
  if (!items.is_array()) throw ParseError(ParseErrorCode::WrongType, items_at, "expected array");
  if (items.empty()) {
    throw ParseError(ParseErrorCode::EmptyConditionGroup, items_at,
                     "condition group must hold at least one condition; use the channel default for "
                     "unconditional values");
  }
  for (std::size_t i = 0; i < items.size(); ++i) g.items.push_back(parse_condition(items[i], child(items_at, i)));
  return g;
}

inline Rule parse_rule(const Json& j, ChannelKind kind, const std::string& at) {
  expect_object(j, at, {"id", "priority", "value", "conditions"}, {"disabled"});
  Rule r;
  r.id = expect_string(j["id"], child(at, "id"));
  if (r.id.empty()) throw ParseError(ParseErrorCode::InvalidIdentifier, child(at, "id"), "rule id must be nonempty");
  r.priority = expect_integer(j["priority"], child(at, "priority"));
  if (r.priority < 0) {
    throw ParseError(ParseErrorCode::NegativePriority, child(at, "priority"), "priority must be >= 1");
  }
  if (r.priority == 0) {
    throw ParseError(ParseErrorCode::ReservedPriority, child(at, "priority"),
                     "priority 0 is reserved for the channel default");
  }
  r.value = channel_value(j["value"], kind, child(at, "value"));
  r.conditions = parse_group(j["conditions"], child(at, "conditions"));
  if (j.contains("disabled")) {
    const Json& d = j["disabled"];
    if (!d.is_boolean()) throw ParseError(ParseErrorCode::WrongType, child(at, "disabled"), "expected boolean");
    r.disabled = d.get<bool>();
  }
  return r;
}

inline Channel parse_channel(const Json& j, ChannelKind kind, const std::string& at) {
  expect_object(j, at, {"default", "rules"});
  Channel ch;
  ch.kind = kind;
  ch.fallback = channel_value(j["default"], kind, child(at, "default"));
  const Json& rules = j["rules"];
  const std::string rules_at = child(at, "rules");
  if (!rules.is_array()) throw ParseError(ParseErrorCode::WrongType, rules_at, "expected array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    Rule r = parse_rule(rules[i], kind, child(rules_at, i));
    if (!seen.insert(r.id).second) {
      throw ParseError(ParseErrorCode::DuplicateRuleId, child(child(rules_at, i), "id"),
                       "duplicate rule id \"" + r.id + "\"");
    }
    ch.rules.push_back(std::move(r));
  }
  return ch;
}

}  // namespace detail

inline RuleSet ruleset_from_json(const Json& doc) {
  using namespace detail;
  const std::string root;
  if (!doc.is_object()) throw ParseError(ParseErrorCode::WrongType, "/", "expected object at top level");
  expect_object(doc, root, {"version", "channels"});
  std::int64_t version = expect_integer(doc["version"], "/version");
  if (version != kCurrentVersion) {
    throw ParseError(ParseErrorCode::UnsupportedVersion, "/version",
                     "unsupported version " + std::to_string(version) + " (expected 1)");
  }
  const Json& channels = doc["channels"];
  if (!channels.is_object()) throw ParseError(ParseErrorCode::WrongType, "/channels", "expected object");
  for (const auto& [key, value] : channels.items()) {
    if (!channel_from_token(key)) {
      throw ParseError(ParseErrorCode::UnknownField, child("/channels", key), "unknown channel \"" + key + "\"");
    }
  }
  RuleSet rs;
  rs.version = version;
  for (ChannelKind kind : kAllChannels) {
    const std::string token(to_token(kind));
    if (!channels.contains(token)) {
      throw ParseError(ParseErrorCode::MissingChannel, child("/channels", token), "missing channel \"" + token + "\"");
    }
    rs.channel(kind) = parse_channel(channels[token], kind, child("/channels", token));
  }
  return rs;
}

namespace detail {

// DOM builder that keeps the JSON pointer of the value being parsed, so a
// real literal that overflows a double can be reported where it occurs.
class LocatingSax {
 public:
  explicit LocatingSax(Json& root) : dom_(root) {}

  bool null() { return value(dom_.null()); }
  bool boolean(bool v) { return value(dom_.boolean(v)); }
  bool number_integer(Json::number_integer_t v) { return value(dom_.number_integer(v)); }
  bool number_unsigned(Json::number_unsigned_t v) { return value(dom_.number_unsigned(v)); }
  bool number_float(Json::number_float_t v, const Json::string_t& s) { return value(dom_.number_float(v, s)); }
  bool string(Json::string_t& v) { return value(dom_.string(v)); }
  bool binary(Json::binary_t& v) { return value(dom_.binary(v)); }
  bool start_object(std::size_t n) {
    bool ok = dom_.start_object(n);
    frames_.push_back({false, 0, {}});
    return ok;
  }
  bool key(Json::string_t& k) {
    frames_.back().key = k;
    return dom_.key(k);
  }
  bool end_object() {
    frames_.pop_back();
    return value(dom_.end_object());
  }
  bool start_array(std::size_t n) {
    bool ok = dom_.start_array(n);
    frames_.push_back({true, 0, {}});
    return ok;
  }
  bool end_array() {
    frames_.pop_back();
    return value(dom_.end_array());
  }
  template <class Exception>
  bool parse_error(std::size_t position, const std::string&, const Exception& ex) {
    if (ex.id == 406) throw ParseError(ParseErrorCode::NonFiniteReal, pointer(), "real value is not finite");
    throw ParseError(ParseErrorCode::Syntax, "byte " + std::to_string(position), ex.what());
  }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };

  bool value(bool ok) {
    if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
    return ok;
  }

  std::string pointer() const {
    std::string out;
    for (const Frame& f : frames_) out += "/" + (f.array ? std::to_string(f.index) : pointer_escape(f.key));
    return out;
  }

  nlohmann::detail::json_sax_dom_parser<Json> dom_;
  std::vector<Frame> frames_;
};

}  // namespace detail

// Parses JSON text. Syntax errors carry "byte N"; real literals too large
// for a double are rejected as non-finite at their JSON pointer.
inline Json parse_json_text(std::string_view document) {
  Json root;
  detail::LocatingSax sax(root);
  Json::sax_parse(document.begin(), document.end(), &sax);
  return root;
}

// Total: returns a RuleSet satisfying every model invariant or throws
// ParseError; there is no partial result.
inline RuleSet parse_ruleset(std::string_view document) { return ruleset_from_json(parse_json_text(document)); }

inline Json condition_to_json(const Condition& c) {
  Json j = Json::object();
  j["source"] = c.source;
  j["name"] = c.name;
  j["kind"] = std::string(to_token(c.mode));
  j["op"] = std::string(to_token(c.op));
  j["ref"] = scalar_to_json(c.ref);
  return j;
}

inline Json group_to_json(const ConditionGroup& g) {
  Json j = Json::object();
  j["mode"] = std::string(to_token(g.mode));
  j["items"] = Json::array();
  for (const Condition& c : g.items) j["items"].push_back(condition_to_json(c));
  return j;
}

inline Json rule_to_json(const Rule& r) {
  Json j = Json::object();
  j["id"] = r.id;
  j["priority"] = r.priority;
  j["value"] = scalar_to_json(r.value);
  if (r.disabled) j["disabled"] = true;
  j["conditions"] = group_to_json(r.conditions);
  return j;
}

inline Json ruleset_to_json(const RuleSet& rs) {
  Json doc = Json::object();
  doc["version"] = rs.version;
  doc["channels"] = Json::object();
  for (ChannelKind kind : kAllChannels) {
    const Channel& ch = rs.channel(kind);
    Json c = Json::object();
    c["default"] = scalar_to_json(ch.fallback);
    c["rules"] = Json::array();
    for (const Rule& r : ch.rules) c["rules"].push_back(rule_to_json(r));
    doc["channels"][std::string(to_token(kind))] = std::move(c);
  }
  return doc;
}

// Canonical text form of a JSON value: fixed key order as built, two-space
// indent, shortest round-trip reals, trailing newline.
inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string serialize_ruleset(const RuleSet& rs) { return canonical_dump(ruleset_to_json(rs)); }

}  // namespace ddac
