#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>

#include "ddac/blackboard.hpp"
#include "ddac/document.hpp"
#include "ddac/model.hpp"
#include "ddac/resolver.hpp"
#include "ddac/simulator.hpp"

namespace ddac::service {

inline constexpr int kDefaultPort = 7351;

// Failed API call; rendered as a problem-detail body.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message, std::optional<std::string> location = {})
      : std::runtime_error(message), status_(status), code_(std::move(code)), location_(std::move(location)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const std::optional<std::string>& location() const { return location_; }

  Json to_json() const {
    Json j = Json::object();
    j["status"] = status_;
    j["code"] = code_;
    j["message"] = what();
    if (location_) j["location"] = *location_;
    return j;
  }

 private:
  int status_;
  std::string code_;
  std::optional<std::string> location_;
};

struct Event {
  std::string type;  // "sync" | "ruleset" | "variable" | "state"
  std::int64_t revision = 0;
  Json payload;

  std::string to_sse() const {
    Json data = Json::object();
    data["type"] = type;
    data["revision"] = revision;
    data["payload"] = payload;
    return "id: " + std::to_string(revision) + "\nevent: " + type + "\ndata: " + data.dump() + "\n\n";
  }
};

class Subscription {
 public:
  void push(Event ev) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      queue_.push_back(std::move(ev));
    }
    cv_.notify_all();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_ && queue_.empty();
  }

  // Next queued event, or nullopt on timeout / close.
  std::optional<Event> next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    Event ev = std::move(queue_.front());
    queue_.pop_front();
    return ev;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> queue_;
  bool closed_ = false;
};

struct StateView {
  std::optional<ResolvedState> state;
  std::int64_t revision = 0;
};

struct DocumentView {
  std::string body;
  std::int64_t revision = 0;
};

// One live controller: rule set, blackboard, tick counter and last resolution.
// Mutations run strictly one at a time; a failed mutation changes nothing.
class Session {
 public:
  explicit Session(RuleSet rs) : ruleset_(std::move(rs)) {}

  DocumentView get_ruleset() const {
    std::lock_guard lock(mu_);
    return {serialize_ruleset(ruleset_), revision_};
  }

  RuleSet ruleset() const {
    std::lock_guard lock(mu_);
    return ruleset_;
  }

  std::int64_t revision() const {
    std::lock_guard lock(mu_);
    return revision_;
  }

  std::int64_t tick() const {
    std::lock_guard lock(mu_);
    return tick_;
  }

  // Replaces the rule set; the next step resolves against it.
  std::int64_t put_ruleset(std::string_view document) {
    RuleSet parsed = parse_or_422(document);
    std::lock_guard lock(mu_);
    ruleset_ = std::move(parsed);
    return publish_locked("ruleset", ruleset_to_json(ruleset_));
  }

  // Edits one rule in place. Allowed fields: priority, value, conditions,
  // disabled. The edited document is re-parsed so every invariant holds.
  std::int64_t patch_rule(std::string_view channel_token, std::string_view id, const Json& patch) {
    auto kind = channel_from_token(channel_token);
    if (!kind) throw ApiError(404, "unknown-channel", "unknown channel \"" + std::string(channel_token) + "\"");
    if (!patch.is_object()) throw ApiError(400, "bad-request", "patch body must be a JSON object");

    std::lock_guard lock(mu_);
    const Channel& ch = ruleset_.channel(*kind);
    std::size_t index = ch.rules.size();
    for (std::size_t i = 0; i < ch.rules.size(); ++i) {
      if (ch.rules[i].id == id) index = i;
    }
    if (index == ch.rules.size()) {
      throw ApiError(404, "unknown-rule", "no rule \"" + std::string(id) + "\" in channel " + std::string(channel_token));
    }

    Json doc = ruleset_to_json(ruleset_);
    Json& rule = doc["channels"][std::string(channel_token)]["rules"][index];
    for (const auto& [field, value] : patch.items()) {
      if (field != "priority" && field != "value" && field != "conditions" && field != "disabled") {
        throw ApiError(422, std::string(to_token(ParseErrorCode::UnknownField)),
                       "field \"" + field + "\" cannot be patched", "/" + field);
      }
      rule[field] = value;
    }
    try {
      ruleset_ = ruleset_from_json(doc);
    } catch (const ParseError& e) {
      throw ApiError(422, std::string(to_token(e.code())), e.reason(), e.location());
    }
    return publish_locked("ruleset", ruleset_to_json(ruleset_));
  }

  // Writes through to the blackboard; never steps.
  std::int64_t set_variable(std::string_view address, const Json& value) {
    auto key = parse_address(address);
    if (!key) {
      throw ApiError(400, "bad-address",
                     "malformed address \"" + std::string(address) + "\" (expected source.name or source.name())");
    }
    const Json& v = (value.is_object() && value.size() == 1 && value.contains("value")) ? value["value"] : value;
    Scalar scalar;
    try {
      scalar = scalar_from_json(v);
    } catch (const ParseError& e) {
      throw ApiError(400, std::string(to_token(e.code())), e.reason());
    }
    std::lock_guard lock(mu_);
    blackboard_.set(*key, scalar);
    Json payload = Json::object();
    payload["address"] = format_address(*key);
    payload["value"] = scalar_to_json(scalar);
    return publish_locked("variable", std::move(payload));
  }

  // Advances n ticks against the current blackboard and returns the final
  // state. Intermediate states only move the tick counter and changed flag.
  std::pair<ResolvedState, std::int64_t> step(std::int64_t n = 1) {
    if (n < 1) throw ApiError(400, "bad-step", "n must be >= 1");
    std::lock_guard lock(mu_);
    for (std::int64_t i = 0; i < n; ++i) {
      last_ = resolve_tick(ruleset_, blackboard_.snapshot(tick_), last_);
      ++tick_;
    }
    std::int64_t rev = publish_locked("state", state_full_json(*last_));
    return {*last_, rev};
  }

  StateView get_state() const {
    std::lock_guard lock(mu_);
    return {last_, revision_};
  }

  VarMap variables() const {
    std::lock_guard lock(mu_);
    return blackboard_.entries();
  }

  // The first event is always a sync carrying the current revision.
  std::shared_ptr<Subscription> subscribe() {
    auto sub = std::make_shared<Subscription>();
    std::lock_guard lock(mu_);
    Json payload = Json::object();
    payload["ruleset"] = ruleset_to_json(ruleset_);
    payload["state"] = last_ ? state_full_json(*last_) : Json();
    sub->push({"sync", revision_, std::move(payload)});
    if (closed_) sub->close();
    else subscribers_.push_back(sub);
    return sub;
  }

  std::size_t subscriber_count() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& weak : subscribers_) n += !weak.expired();
    return n;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    for (auto& weak : subscribers_) {
      if (auto sub = weak.lock()) sub->close();
    }
    subscribers_.clear();
  }

 private:
  static RuleSet parse_or_422(std::string_view document) {
    try {
      return parse_ruleset(document);
    } catch (const ParseError& e) {
      throw ApiError(422, std::string(to_token(e.code())), e.reason(), e.location());
    }
  }

  std::int64_t publish_locked(std::string type, Json payload) {
    ++revision_;
    Event ev{std::move(type), revision_, std::move(payload)};
    std::erase_if(subscribers_, [&](const std::weak_ptr<Subscription>& weak) {
      auto sub = weak.lock();
      if (!sub) return true;
      sub->push(ev);
      return false;
    });
    return revision_;
  }

  mutable std::mutex mu_;
  RuleSet ruleset_;
  Blackboard blackboard_;
  std::int64_t tick_ = 0;
  std::optional<ResolvedState> last_;
  std::int64_t revision_ = 0;
  std::vector<std::weak_ptr<Subscription>> subscribers_;
  bool closed_ = false;
};

// HTTP/1.1 + SSE front end over a Session.
//   GET  /api/ruleset                       canonical rule document
//   PUT  /api/ruleset                       replace rule set
//   PATCH /api/ruleset/{channel}/rules/{id} edit one rule
//   PUT  /api/vars/{address}                write a variable
//   POST /api/step                          {"n": k}
//   GET  /api/state                         last resolution (204 before first step)
//   GET  /api/events                        text/event-stream
// Every response carries the revision it reflects in X-Revision.
class Server {
 public:
  explicit Server(Session& session, std::string static_dir = {}) : session_(session) {
    http_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    routes(std::move(static_dir));
  }

  ~Server() { stop(); }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  bool bind(const std::string& host, int port) {
    if (!http_.bind_to_port(host, port)) return false;
    port_ = port;
    return true;
  }

  // Binds an ephemeral port; returns it or -1.
  int bind_any(const std::string& host = "127.0.0.1") {
    port_ = http_.bind_to_any_port(host);
    return port_;
  }

  int port() const { return port_; }

  // Blocks until stop().
  bool listen() { return http_.listen_after_bind(); }

  void wait_until_ready() const { http_.wait_until_ready(); }

  void stop() {
    session_.close();
    if (http_.is_running()) http_.stop();
  }

 private:
  static void send_json(httplib::Response& res, int status, const Json& body, std::int64_t revision) {
    res.status = status;
    res.set_header("X-Revision", std::to_string(revision));
    res.set_content(body.dump(), "application/json");
  }

  void send_error(httplib::Response& res, const ApiError& e) {
    res.status = e.status();
    res.set_header("X-Revision", std::to_string(session_.revision()));
    res.set_content(e.to_json().dump(), "application/problem+json");
  }

  template <typename Handler>
  httplib::Server::Handler guarded(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const ApiError& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_error(res, ApiError(500, "internal", e.what()));
      }
    };
  }

  static Json parse_body(const httplib::Request& req) {
    try {
      return parse_json_text(req.body);
    } catch (const ParseError& e) {
      throw ApiError(400, "bad-json", e.reason(), e.location());
    }
  }

  static Json revision_body(std::int64_t revision) {
    Json j = Json::object();
    j["revision"] = revision;
    return j;
  }

  void routes(std::string static_dir) {
    http_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    http_.Get("/api/ruleset", guarded([this](const httplib::Request&, httplib::Response& res) {
                DocumentView doc = session_.get_ruleset();
                res.set_header("X-Revision", std::to_string(doc.revision));
                res.set_header("ETag", "\"" + std::to_string(doc.revision) + "\"");
                res.set_content(doc.body, "application/json");
              }));

    http_.Put("/api/ruleset", guarded([this](const httplib::Request& req, httplib::Response& res) {
                std::int64_t rev = session_.put_ruleset(req.body);
                send_json(res, 200, revision_body(rev), rev);
              }));

    http_.Patch(R"(/api/ruleset/([^/]+)/rules/([^/]+))",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  std::int64_t rev = session_.patch_rule(req.matches[1].str(), req.matches[2].str(), parse_body(req));
                  send_json(res, 200, revision_body(rev), rev);
                }));

    http_.Put(R"(/api/vars/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                std::int64_t rev = session_.set_variable(req.matches[1].str(), parse_body(req));
                send_json(res, 200, revision_body(rev), rev);
              }));

    http_.Post("/api/step", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 std::int64_t n = 1;
                 if (!req.body.empty()) {
                   Json body = parse_body(req);
                   if (!body.is_object()) throw ApiError(400, "bad-step", "body must be {\"n\": <integer>}");
                   if (body.contains("n")) {
                     if (!body["n"].is_number_integer()) throw ApiError(400, "bad-step", "n must be an integer");
                     n = body["n"].get<std::int64_t>();
                   }
                 }
                 auto [state, rev] = session_.step(n);
                 Json out = revision_body(rev);
                 out["state"] = state_full_json(state);
                 send_json(res, 200, out, rev);
               }));

    http_.Get("/api/state", guarded([this](const httplib::Request&, httplib::Response& res) {
                StateView view = session_.get_state();
                if (!view.state) {
                  res.status = 204;
                  res.set_header("X-Revision", std::to_string(view.revision));
                  return;
                }
                Json out = revision_body(view.revision);
                out["state"] = state_full_json(*view.state);
                send_json(res, 200, out, view.revision);
              }));

    http_.Get("/api/vars", guarded([this](const httplib::Request&, httplib::Response& res) {
                std::int64_t rev = session_.revision();
                Json vars = Json::object();
                for (const auto& [key, value] : session_.variables()) vars[format_address(key)] = scalar_to_json(value);
                Json out = revision_body(rev);
                out["vars"] = std::move(vars);
                send_json(res, 200, out, rev);
              }));

    http_.Get("/api/events", [this](const httplib::Request&, httplib::Response& res) {
      auto sub = session_.subscribe();
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [sub](std::size_t, httplib::DataSink& sink) {
            if (auto ev = sub->next(std::chrono::milliseconds(200))) {
              std::string frame = ev->to_sse();
              return sink.write(frame.data(), frame.size());
            }
            if (sub->closed()) {
              sink.done();
              return true;
            }
            return sink.is_writable();
          },
          [sub](bool) { sub->close(); });
    });

    if (!static_dir.empty()) {
      http_.set_mount_point("/", static_dir);
    } else {
      http_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            "<!doctype html><title>ddac playground</title>"
            "<p>UI assets are not installed. Start the server with --static &lt;dir&gt; to serve them. "
            "The API lives under <code>/api</code>.</p>",
            "text/html");
      });
    }
  }

  Session& session_;
  httplib::Server http_;
  int port_ = -1;
};

}  // namespace ddac::service
