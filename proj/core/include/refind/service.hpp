#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "refind/familiarity_model.hpp"
#include "refind/simulation.hpp"

namespace refind::service {

/// Immutable state shared by every session started under it: corpus,
/// features, catalog, and the two fitted models.
struct Snapshot {
    std::shared_ptr<const sim::Environment> env;
    CandidateModel candidate;
    TargetModel target;

    bool trained() const noexcept { return candidate.fitted() && target.fitted(); }
};

struct Response {
    int status = 200;
    std::string body;  // always JSON
};

struct ServiceOptions {
    std::chrono::seconds idle_expiry{3600};
    /// Monotonic seconds. Defaults to std::chrono::steady_clock.
    std::function<double()> clock;
};

/// The wizard session API, transport-independent. Each method maps to one
/// HTTP endpoint and returns its status code and JSON body.
///
/// Sessions are independent and serialized individually; the snapshot is
/// swapped atomically and sessions keep the snapshot they started with.
class Service {
public:
    explicit Service(std::shared_ptr<const Snapshot> snapshot, ServiceOptions options = {});

    /// POST /sessions
    Response create_session();
    /// GET /sessions/{id}/question
    Response current_question(const std::string& session_id);
    /// POST /sessions/{id}/answer  body: {"question_id": "...", "value": ...}
    Response answer(const std::string& session_id, std::string_view body);
    /// POST /sessions/{id}/skip  body: {"question_id": "..."} (optional)
    Response skip(const std::string& session_id, std::string_view body);
    /// GET /sessions/{id}/results
    Response results(const std::string& session_id);
    /// GET /sessions/{id}/transcript
    Response transcript(const std::string& session_id);
    /// GET /healthz
    Response healthz() const;

    /// Replaces the shared snapshot; running sessions are unaffected.
    void swap_snapshot(std::shared_ptr<const Snapshot> snapshot);
    /// Swaps in a snapshot with new models over the current corpus.
    void retrain(CandidateModel candidate, TargetModel target);
    std::shared_ptr<const Snapshot> snapshot() const;

    /// Drops sessions idle for longer than the expiry. Returns how many.
    std::size_t expire_idle();
    std::size_t session_count() const;

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& session_id);
    Response submit(const std::string& session_id, std::string_view body, bool skip);
    double now() const;

    ServiceOptions options_;
    mutable std::mutex mu_;
    std::shared_ptr<const Snapshot> snapshot_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
    std::uint64_t id_salt_;
};

/// Serves a Service over HTTP+JSON.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool listen();
    /// Blocks until listen() is accepting connections.
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace refind::service
