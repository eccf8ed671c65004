#include "refind/service.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "json_util.hpp"
#include "refind/error.hpp"
#include "refind/random.hpp"

namespace refind::service {

using detail::json;

struct Service::Session {
    std::mutex mu;
    std::shared_ptr<const Snapshot> snap;
    SessionState state;
    double issued_at = 0.0;
    double last_touch = 0.0;
};

namespace {

int status_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::not_found: return 404;
        case ErrorKind::conflict: return 409;
        case ErrorKind::io: return 500;
        case ErrorKind::invalid_argument:
        case ErrorKind::schema:
        default: return 400;
    }
}

Response error_response(int status, std::string_view message) {
    return {status, json{{"error", std::string(message)}}.dump()};
}

Response ok(const json& body, int status = 200) { return {status, body.dump()}; }

json question_json(const Question& q, std::size_t position, std::size_t total) {
    json j{{"question_id", q.question_id},
           {"attribute", q.attribute},
           {"prompt", q.prompt},
           {"kind", std::string(to_string(q.kind))},
           {"options", q.options},
           {"accepts_precise", q.accepts_precise()},
           {"position", position},
           {"total", total}};
    j["split_threshold"] = q.split_threshold ? json(*q.split_threshold) : json(nullptr);
    return j;
}

std::size_t position_of(const Question& q, const Catalog& catalog) {
    for (std::size_t i = 0; i < catalog.size(); ++i)
        if (catalog[i].question_id == q.question_id) return i + 1;
    return 0;
}

/// The question the session is waiting on, or null when it is finished.
const Question* pending(const SessionState& state, const Catalog& catalog) {
    if (state.candidate_ids.empty()) return nullptr;
    return next_question(state, catalog);
}

json pending_json(const SessionState& state, const Catalog& catalog) {
    const Question* q = pending(state, catalog);
    if (!q) return nullptr;
    return question_json(*q, position_of(*q, catalog), catalog.size());
}

AnswerValue decode_value(const Question& q, const json& v) {
    switch (q.kind) {
        case QuestionKind::binary_split:
        case QuestionKind::precise_numeric_allowed:
            if (v.is_number()) return v.get<double>();
            if (q.kind == QuestionKind::binary_split && v.is_string()) {
                const auto s = v.get<std::string>();
                if (s == "option_a" || s == "A") return OptionA{};
                if (s == "option_b" || s == "B") return OptionB{};
            }
            throw invalid_argument("value for '" + q.question_id + "' must be \"option_a\", \"option_b\" or a number");
        case QuestionKind::boolean:
            if (v.is_boolean()) return v.get<bool>();
            if (v.is_string() && v.get<std::string>() == "yes") return true;
            if (v.is_string() && v.get<std::string>() == "no") return false;
            throw invalid_argument("value for '" + q.question_id + "' must be a boolean");
        case QuestionKind::categorical:
        default:
            if (v.is_string()) return v.get<std::string>();
            throw invalid_argument("value for '" + q.question_id + "' must be a string");
    }
}

double steady_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

Service::Service(std::shared_ptr<const Snapshot> snapshot, ServiceOptions options)
    : options_(std::move(options)), snapshot_(std::move(snapshot)), id_salt_(std::random_device{}()) {
    if (!snapshot_ || !snapshot_->env) throw invalid_argument("service needs a corpus snapshot");
    if (!options_.clock) options_.clock = steady_seconds;
}

double Service::now() const { return options_.clock(); }

std::shared_ptr<const Snapshot> Service::snapshot() const {
    std::lock_guard lock(mu_);
    return snapshot_;
}

void Service::swap_snapshot(std::shared_ptr<const Snapshot> snapshot) {
    if (!snapshot || !snapshot->env) throw invalid_argument("service needs a corpus snapshot");
    std::lock_guard lock(mu_);
    snapshot_ = std::move(snapshot);
}

void Service::retrain(CandidateModel candidate, TargetModel target) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<Snapshot>();
    next->env = snapshot_->env;
    next->candidate = std::move(candidate);
    next->target = std::move(target);
    snapshot_ = std::move(next);
}

std::size_t Service::expire_idle() {
    const double cutoff = now() - static_cast<double>(options_.idle_expiry.count());
    std::lock_guard lock(mu_);
    return std::erase_if(sessions_, [&](const auto& kv) {
        std::lock_guard session_lock(kv.second->mu);
        return kv.second->last_touch < cutoff;
    });
}

std::size_t Service::session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::shared_ptr<Service::Session> Service::find(const std::string& session_id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    return it == sessions_.end() ? nullptr : it->second;
}

Response Service::create_session() {
    expire_idle();
    auto snap = snapshot();
    if (!snap->trained()) return error_response(409, "models are not trained");

    auto session = std::make_shared<Session>();
    session->snap = snap;
    std::string id;
    {
        std::lock_guard lock(mu_);
        char buf[40];
        std::snprintf(buf, sizeof buf, "s%06llx%08llx", static_cast<unsigned long long>(next_id_),
                      static_cast<unsigned long long>(mix_seed(id_salt_ ^ next_id_) & 0xffffffffULL));
        ++next_id_;
        id = buf;
        session->state = start_session(id, snap->env->corpus);
        session->issued_at = session->last_touch = now();
        sessions_.emplace(id, session);
    }
    const auto& catalog = snap->env->catalog;
    return ok({{"session_id", id},
               {"candidate_count", session->state.candidate_ids.size()},
               {"question", pending_json(session->state, catalog)}},
              201);
}

Response Service::current_question(const std::string& session_id) {
    auto s = find(session_id);
    if (!s) return error_response(404, "unknown session '" + session_id + "'");
    std::lock_guard lock(s->mu);
    s->last_touch = now();
    const auto& catalog = s->snap->env->catalog;
    return ok({{"session_id", session_id},
               {"remaining_count", s->state.candidate_ids.size()},
               {"done", pending(s->state, catalog) == nullptr},
               {"question", pending_json(s->state, catalog)}});
}

Response Service::answer(const std::string& session_id, std::string_view body) { return submit(session_id, body, false); }

Response Service::skip(const std::string& session_id, std::string_view body) { return submit(session_id, body, true); }

Response Service::submit(const std::string& session_id, std::string_view body, bool skip) {
    auto s = find(session_id);
    if (!s) return error_response(404, "unknown session '" + session_id + "'");
    std::lock_guard lock(s->mu);
    const double t = now();
    s->last_touch = t;
    const auto& env = *s->snap->env;
    try {
        json req = json::object();
        if (!body.empty() && body.find_first_not_of(" \t\r\n") != std::string_view::npos)
            req = detail::parse_json(body, "request body");
        if (!req.is_object()) throw schema_error("request body must be a JSON object");

        const Question* q = pending(s->state, env.catalog);
        if (!q) return error_response(409, "session is finished: no question is pending");
        const auto qid = detail::get_or<std::string>(req, "question_id", "");
        if (skip ? (!qid.empty() && qid != q->question_id) : qid != q->question_id) {
            if (qid.empty()) throw schema_error("missing field 'question_id'");
            return error_response(409, "stale question '" + qid + "': the pending question is '" + q->question_id + "'");
        }

        Answer a;
        a.question_id = q->question_id;
        a.elapsed_s = std::max(0.0, t - s->issued_at);
        a.value = skip ? AnswerValue{Skip{}} : decode_value(*q, detail::require(req, "value"));
        s->state = apply_answer(std::move(s->state), a, env.catalog, env.corpus, env.tolerances);
        s->issued_at = t;
    } catch (const Error& e) {
        return error_response(status_of(e.kind()), e.what());
    }
    const json next = pending_json(s->state, env.catalog);
    return ok({{"session_id", session_id},
               {"remaining_count", s->state.candidate_ids.size()},
               {"done", next.is_null()},
               {"question", next}});
}

Response Service::results(const std::string& session_id) {
    auto s = find(session_id);
    if (!s) return error_response(404, "unknown session '" + session_id + "'");
    std::lock_guard lock(s->mu);
    s->last_touch = now();
    const Snapshot& snap = *s->snap;

    json out{{"session_id", session_id}, {"remaining_count", s->state.candidate_ids.size()}};
    double F_t = 0.0;
    if (s->state.answers.empty()) {
        F_t = sim::neutral_target_familiarity(snap.target);
        out["metrics"] = nullptr;
    } else {
        const SessionMetrics m = session_metrics(s->state);
        F_t = predict_target(snap.target, m);
        out["metrics"] = {{"T_a", m.T_a}, {"P_s", m.P_s}, {"P_e", m.P_e}};
    }
    out["F_t"] = F_t;
    if (s->state.candidate_ids.empty()) {
        out["ranked"] = json::array();
    } else {
        std::vector<CandidateFeatures> features;
        features.reserve(s->state.candidate_ids.size());
        for (const auto& id : s->state.candidate_ids) features.push_back(snap.env->features_of(id));
        json ranked = json::parse(ranked_to_json(rank(features, snap.candidate, F_t)));
        for (auto& entry : ranked) {
            const DocumentRecord& doc = snap.env->corpus.document(entry.at("doc_id").get<std::string>());
            entry["path"] = doc.path;
            entry["pages"] = doc.pages;
            entry["last_accessed_at"] = doc.last_accessed_at;
        }
        out["ranked"] = std::move(ranked);
    }
    return ok(out);
}

Response Service::transcript(const std::string& session_id) {
    auto s = find(session_id);
    if (!s) return error_response(404, "unknown session '" + session_id + "'");
    std::lock_guard lock(s->mu);
    s->last_touch = now();
    return {200, session_to_json(s->state)};
}

Response Service::healthz() const {
    auto snap = snapshot();
    return ok({{"status", "ok"},
               {"documents", snap->env->corpus.size()},
               {"questions", snap->env->catalog.size()},
               {"trained", snap->trained()},
               {"sessions", session_count()}});
}

}  // namespace refind::service
