#pragma once

// In-memory session service for interactive runs. SessionManager holds the
// logic and is usable without a network; mount_routes() exposes it as
// JSON over HTTP:
//
//   POST /sessions                      {network, config, steps_limit?, request_token?}
//   POST /sessions/{id}/step            {count, request_token?}
//   POST /sessions/{id}/inject          {targets | top_k, p, request_token?}
//   GET  /sessions/{id}/snapshot
//   GET  /sessions/{id}/stream?after=&limit=&wait_ms=   (NDJSON rows)
//   GET  /sessions/{id}/manifest        (replayable experiment spec)

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "ricci/demon.hpp"
#include "ricci/errors.hpp"
#include "ricci/experiment.hpp"
#include "ricci/simulation.hpp"
#include "ricci/telemetry_io.hpp"

namespace ricci {

inline constexpr std::size_t kSnapshotEdgeLimit = 2000;

class ConflictError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class SessionStatus { paused, running, finished };

inline const char* status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::paused:
      return "paused";
    case SessionStatus::running:
      return "running";
    case SessionStatus::finished:
      return "finished";
  }
  return "paused";
}

// Rows carry their sequence number (= row index) in addition to the
// telemetry columns.
inline json sequenced_row(const TelemetryRow& r, std::size_t seq) {
  json j = row_to_json(r);
  j["seq"] = seq;
  return j;
}

class Session {
 public:
  Session(std::string id, NetworkSource network, ControlConfig cfg, std::optional<std::size_t> steps_limit)
      : id_(std::move(id)), network_(std::move(network)), graph_(network_.build()),
        sim_(graph_, cfg), steps_limit_(steps_limit) {
    if (steps_limit_ && *steps_limit_ == 0) status_ = SessionStatus::finished;
  }

  const std::string& id() const { return id_; }

  json step(std::size_t count, const std::optional<std::string>& token) {
    std::unique_lock lock(mu_);
    if (auto cached = replay(token)) return *cached;
    if (status_ == SessionStatus::finished) throw ConflictError("session is finished");
    if (steps_limit_) count = std::min(count, *steps_limit_ - sim_.iteration());
    const std::size_t first = sim_.telemetry().rows.size();
    status_ = SessionStatus::running;
    for (std::size_t i = 0; i < count; ++i) {
      sim_.step();
      cv_.notify_all();
    }
    status_ = steps_limit_ && sim_.iteration() >= *steps_limit_ ? SessionStatus::finished : SessionStatus::paused;
    json out = snapshot_locked();
    json rows = json::array();
    const auto& all = sim_.telemetry().rows;
    for (std::size_t i = first; i < all.size(); ++i) rows.push_back(sequenced_row(all[i], i));
    out["rows"] = std::move(rows);
    cv_.notify_all();
    return remember(token, std::move(out));
  }

  json inject(const InputEvent& requested, const std::optional<std::string>& token) {
    std::unique_lock lock(mu_);
    if (auto cached = replay(token)) return *cached;
    if (status_ == SessionStatus::finished) throw ConflictError("session is finished");
    InputEvent ev = requested;
    ev.iteration = sim_.iteration();
    auto nodes = resolve_targets(ev.targets, graph_);
    sim_.inject(ev);
    log_.push_back(ev);

    std::size_t touched = 0;
    for (EdgeId e = 0; e < graph_.edge_count(); ++e) {
      const Edge& ed = graph_.edge(e);
      if (std::find(nodes.begin(), nodes.end(), ed.u) != nodes.end() ||
          std::find(nodes.begin(), nodes.end(), ed.v) != nodes.end())
        ++touched;
    }
    json targets = json::array();
    for (NodeId x : nodes) targets.push_back(label_to_json(graph_.label(x)));
    json out{{"acknowledged", true},
             {"iteration", ev.iteration},
             {"event_marker", describe_event(ev)},
             {"targets", std::move(targets)},
             {"touched_edges", touched},
             {"lambda", lambda_summary()}};
    return remember(token, std::move(out));
  }

  json snapshot() const {
    std::unique_lock lock(mu_);
    return snapshot_locked();
  }

  // Rows with seq > after, waiting up to `wait` for at least one to appear.
  std::vector<json> rows_after(long long after, std::size_t limit, std::chrono::milliseconds wait) const {
    std::unique_lock lock(mu_);
    auto available = [&] {
      return static_cast<long long>(sim_.telemetry().rows.size()) - 1 > after || status_ == SessionStatus::finished;
    };
    if (wait.count() > 0) cv_.wait_for(lock, wait, available);
    std::vector<json> out;
    const auto& rows = sim_.telemetry().rows;
    for (std::size_t i = static_cast<std::size_t>(std::max(0LL, after + 1)); i < rows.size() && out.size() < limit; ++i)
      out.push_back(sequenced_row(rows[i], i));
    return out;
  }

  bool finished() const {
    std::unique_lock lock(mu_);
    return status_ == SessionStatus::finished;
  }

  // Experiment spec reproducing this session's telemetry through simulate().
  json manifest() const {
    std::unique_lock lock(mu_);
    ExperimentSpec spec;
    spec.name = "session-" + id_.substr(0, 8);
    spec.network = network_;
    if (std::holds_alternative<GraphFile>(network_.source)) spec.network.source = graph_;
    spec.schedule = InputSchedule(log_);
    spec.cfg = sim_.config();
    spec.steps = sim_.iteration();
    json m = spec_to_json(spec);
    m["format_version"] = 1;
    return m;
  }

  Telemetry telemetry() const {
    std::unique_lock lock(mu_);
    return sim_.telemetry();
  }

 private:
  std::optional<json> replay(const std::optional<std::string>& token) const {
    if (!token) return std::nullopt;
    auto it = tokens_.find(*token);
    if (it == tokens_.end()) return std::nullopt;
    return it->second;
  }

  json remember(const std::optional<std::string>& token, json response) {
    if (token) tokens_[*token] = response;
    return response;
  }

  json lambda_summary() const {
    const auto& lam = sim_.state().lambda;
    double lo = 0.0, hi = 0.0, sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t e = 0; e < lam.size(); ++e) {
      lo = e == 0 ? lam[e] : std::min(lo, lam[e]);
      hi = e == 0 ? lam[e] : std::max(hi, lam[e]);
      sum += lam[e];
      nonzero += lam[e] != 0.0;
    }
    return {{"min", lo}, {"max", hi}, {"sum", sum}, {"nonzero_edges", nonzero}};
  }

  json snapshot_locked() const {
    const auto& state = sim_.state();
    const auto& field = sim_.curvature();
    const bool per_edge_kappa = graph_.edge_count() <= kSnapshotEdgeLimit;
    json nodes = json::array();
    for (const auto& l : graph_.labels()) nodes.push_back(label_to_json(l));
    json edges = json::array();
    for (EdgeId e = 0; e < graph_.edge_count(); ++e) {
      const Edge& ed = graph_.edge(e);
      json je{{"u", label_to_json(graph_.label(ed.u))},
              {"v", label_to_json(graph_.label(ed.v))},
              {"w", state.mu[e]},
              {"lambda", state.lambda[e]}};
      if (per_edge_kappa) je["kappa"] = field.values[e];
      edges.push_back(std::move(je));
    }
    const auto& rows = sim_.telemetry().rows;
    json out = sequenced_row(rows.back(), rows.size() - 1);
    out["id"] = id_;
    out["status"] = status_name(status_);
    out["nodes"] = std::move(nodes);
    out["edges"] = std::move(edges);
    out["lambda_summary"] = lambda_summary();
    out["sequence"] = rows.size() - 1;
    return out;
  }

  std::string id_;
  NetworkSource network_;
  WeightedGraph graph_;
  Simulation sim_;
  std::optional<std::size_t> steps_limit_;
  SessionStatus status_ = SessionStatus::paused;
  std::vector<InputEvent> log_;
  std::map<std::string, json> tokens_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
};

namespace detail {

inline std::optional<std::string> request_token(const json& body) {
  if (!body.contains("request_token")) return std::nullopt;
  if (!body["request_token"].is_string()) throw ParseError("'request_token' must be a string");
  return body["request_token"].get<std::string>();
}

}  // namespace detail

class SessionManager {
 public:
  // Returns {id, snapshot fields...}.
  json create(const json& body) {
    if (!body.is_object()) throw ParseError("session spec must be an object");
    auto token = detail::request_token(body);
    {
      std::shared_lock lock(mu_);
      if (token) {
        auto it = create_tokens_.find(*token);
        if (it != create_tokens_.end()) return sessions_.at(it->second)->snapshot();
      }
    }
    NetworkSource network = body.contains("network") ? network_from_json(body["network"]) : NetworkSource{};
    ControlConfig cfg = body.contains("config") ? config_from_json(body["config"]) : ControlConfig{};
    if (!(cfg.dt > 0.0)) throw ParameterError("dt must be positive");
    std::optional<std::size_t> limit;
    if (body.contains("steps_limit")) limit = detail::get_count(body, "steps_limit", 0);

    std::unique_lock lock(mu_);
    if (token) {
      auto it = create_tokens_.find(*token);
      if (it != create_tokens_.end()) return sessions_.at(it->second)->snapshot();
    }
    auto session = std::make_shared<Session>(new_id(), std::move(network), cfg, limit);
    sessions_[session->id()] = session;
    if (token) create_tokens_[*token] = session->id();
    return session->snapshot();
  }

  std::shared_ptr<Session> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
    return it->second;
  }

  json step(const std::string& id, const json& body) {
    auto s = get(id);
    if (!body.is_object()) throw ParseError("step body must be an object");
    return s->step(detail::get_count(body, "count", 1), detail::request_token(body));
  }

  json inject(const std::string& id, const json& body) {
    auto s = get(id);
    if (!body.is_object()) throw ParseError("inject body must be an object");
    json ev = body;
    ev["iteration"] = 0;  // replaced by the session's current iteration
    if (!ev.contains("p")) ev["p"] = nullptr;
    return s->inject(event_from_json(ev), detail::request_token(body));
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return sessions_.size();
  }

 private:
  std::string new_id() {
    std::uniform_int_distribution<std::uint64_t> dist;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(dist(rng_)),
                  static_cast<unsigned long long>(dist(rng_)));
    return buf;
  }

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::string> create_tokens_;
  std::mt19937_64 rng_{std::random_device{}() ^ (static_cast<std::uint64_t>(std::random_device{}()) << 32)};
};

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    send_json(res, 200, f());
  } catch (const NotFoundError& e) {
    send_json(res, 404, {{"error", e.what()}});
  } catch (const ConflictError& e) {
    send_json(res, 409, {{"error", e.what()}});
  } catch (const ValidationError& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

inline json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return parse_json_text(req.body, "request body");
}

inline long long query_int(const httplib::Request& req, const char* key, long long fallback) {
  if (!req.has_param(key)) return fallback;
  try {
    return std::stoll(req.get_param_value(key));
  } catch (const std::exception&) {
    throw ParseError(std::string("query parameter '") + key + "' must be an integer");
  }
}

}  // namespace detail

inline void mount_routes(httplib::Server& server, SessionManager& manager) {
  using detail::guarded;
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.create(detail::body_json(req)); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/step)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.step(req.matches[1], detail::body_json(req)); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/inject)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.inject(req.matches[1], detail::body_json(req)); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/snapshot)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.get(req.matches[1])->snapshot(); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/manifest)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.get(req.matches[1])->manifest(); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/stream)", [&](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Session> session;
    long long after = -1, limit = 0, wait_ms = 0;
    try {
      session = manager.get(req.matches[1]);
      after = detail::query_int(req, "after", -1);
      limit = detail::query_int(req, "limit", 0);
      wait_ms = detail::query_int(req, "wait_ms", 0);
      if (limit < 0 || wait_ms < 0) throw ParseError("limit and wait_ms must be nonnegative");
    } catch (const NotFoundError& e) {
      return detail::send_json(res, 404, {{"error", e.what()}});
    } catch (const ValidationError& e) {
      return detail::send_json(res, 400, {{"error", e.what()}});
    }
    // Pushes rows as they appear until `limit` rows went out (0: no limit),
    // `wait_ms` passes without a new row, or the session finishes.
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [session, after, limit, wait_ms, sent = std::size_t{0}](std::size_t, httplib::DataSink& sink) mutable {
          const std::size_t cap = limit > 0 ? static_cast<std::size_t>(limit) - sent : SIZE_MAX;
          auto rows = session->rows_after(after, cap, std::chrono::milliseconds(wait_ms));
          for (const auto& r : rows) {
            std::string line = r.dump() + "\n";
            if (!sink.write(line.data(), line.size())) return false;
          }
          sent += rows.size();
          if (!rows.empty()) after = rows.back()["seq"].get<long long>();
          const bool done = (limit > 0 && sent >= static_cast<std::size_t>(limit)) || rows.empty() ||
                            (session->finished() && session->rows_after(after, 1, {}).empty());
          if (done) sink.done();
          return true;
        });
  });
}

}  // namespace ricci
