#include "refind/experience_log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json_util.hpp"

namespace refind {

using detail::json;

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::open: return "open";
        case EventKind::close: return "close";
        case EventKind::page_view: return "page_view";
        case EventKind::print: return "print";
        case EventKind::refind: return "refind";
        case EventKind::annotate: return "annotate";
    }
    return "open";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    if (s == "open") return EventKind::open;
    if (s == "close") return EventKind::close;
    if (s == "page_view") return EventKind::page_view;
    if (s == "print") return EventKind::print;
    if (s == "refind") return EventKind::refind;
    if (s == "annotate") return EventKind::annotate;
    return std::nullopt;
}

void validate_event(const ExperienceEvent& e) {
    if (e.doc_id.empty()) throw invalid_argument("event doc_id must be non-empty");
    if (e.timestamp <= 0) throw invalid_argument("event timestamp must be > 0");
    const bool is_view = e.kind == EventKind::page_view;
    if (is_view) {
        if (!e.page) throw invalid_argument("page_view event requires page");
        if (!e.duration_s) throw invalid_argument("page_view event requires duration_s");
        if (*e.page < 1) throw invalid_argument("page_view page must be >= 1");
        if (!(*e.duration_s >= 0.0) || !std::isfinite(*e.duration_s))
            throw invalid_argument("page_view duration_s must be a non-negative number");
    } else if (e.page || e.duration_s) {
        throw invalid_argument("page and duration_s are only allowed on page_view events");
    }
}

void ExperienceLog::append(ExperienceEvent event) {
    validate_event(event);
    by_doc_[event.doc_id].push_back(events_.size());
    events_.push_back(std::move(event));
}

std::span<const std::size_t> ExperienceLog::positions_for(std::string_view doc_id) const {
    auto it = by_doc_.find(std::string(doc_id));
    if (it == by_doc_.end()) return {};
    return it->second;
}

double cumulative_minutes(const ExperienceLog& log, std::string_view doc_id) {
    double seconds = 0.0;
    for (std::size_t pos : log.positions_for(doc_id)) {
        const auto& e = log.events()[pos];
        if (e.kind == EventKind::page_view) seconds += *e.duration_s;
    }
    return seconds / 60.0;
}

CandidateFeatures derive_features(const ExperienceLog& log, const DocumentRecord& doc,
                                  const UserProfile& profile, EpochSeconds now) {
    CandidateFeatures f;
    f.doc_id = doc.doc_id;
    const auto positions = log.positions_for(doc.doc_id);
    EpochSeconds last = doc.created_at;
    for (std::size_t pos : positions) {
        const auto& e = log.events()[pos];
        last = std::max(last, e.timestamp);
        if (e.kind == EventKind::open) f.R += 1.0;
    }
    f.C = cumulative_minutes(log, doc.doc_id);
    f.I = std::max(0.0, static_cast<double>(now - last) / kSecondsPerDay);
    f.D = topic_distance(doc, profile);
    return f;
}

ExperienceSummary summarize_experience(const ExperienceLog& log, const DocumentRecord& doc) {
    ExperienceSummary s;
    s.doc_id = doc.doc_id;
    std::set<int> pages_seen;
    for (std::size_t pos : log.positions_for(doc.doc_id)) {
        const auto& e = log.events()[pos];
        switch (e.kind) {
            case EventKind::print: s.printed = true; break;
            case EventKind::refind: s.refound_before = true; break;
            case EventKind::page_view: pages_seen.insert(*e.page); break;
            default: break;
        }
        if (e.time_tag && !e.time_tag->empty()) s.unusual_time_access = true;
        if (e.location_tag && !e.location_tag->empty()) s.unusual_location_access = true;
    }
    if (doc.pages > 0) {
        s.coverage = std::min(1.0, static_cast<double>(pages_seen.size()) / doc.pages);
    }
    return s;
}

std::string event_to_json_line(const ExperienceEvent& e) {
    json j{{"doc_id", e.doc_id}, {"kind", std::string(to_string(e.kind))}, {"timestamp", e.timestamp}};
    if (e.page) j["page"] = *e.page;
    if (e.duration_s) j["duration_s"] = *e.duration_s;
    if (e.location_tag) j["location_tag"] = *e.location_tag;
    if (e.time_tag) j["time_tag"] = *e.time_tag;
    return j.dump();
}

ExperienceEvent event_from_json_line(std::string_view line) {
    const json j = detail::parse_json(line, "event");
    ExperienceEvent e;
    e.doc_id = detail::get_as<std::string>(j, "doc_id");
    const auto kind = detail::get_as<std::string>(j, "kind");
    auto parsed = parse_event_kind(kind);
    if (!parsed) throw schema_error("unknown event kind '" + kind + "'");
    e.kind = *parsed;
    e.timestamp = detail::get_as<EpochSeconds>(j, "timestamp");
    if (j.contains("page")) e.page = detail::get_as<int>(j, "page");
    if (j.contains("duration_s")) e.duration_s = detail::get_as<double>(j, "duration_s");
    if (j.contains("location_tag")) e.location_tag = detail::get_as<std::string>(j, "location_tag");
    if (j.contains("time_tag")) e.time_tag = detail::get_as<std::string>(j, "time_tag");
    validate_event(e);
    return e;
}

ExperienceLog read_event_log(std::istream& in) {
    ExperienceLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            log.append(event_from_json_line(line));
        } catch (const Error& e) {
            throw Error(e.kind(), "event line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

ExperienceLog read_event_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open event log '" + path + "'");
    return read_event_log(in);
}

void write_event_log(std::ostream& out, const ExperienceLog& log) {
    for (const auto& e : log.events()) out << event_to_json_line(e) << '\n';
}

void append_event_to_file(const std::string& path, const ExperienceEvent& event) {
    validate_event(event);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw io_error("failed to open event log '" + path + "' for append");
    out << event_to_json_line(event) << '\n';
    if (!out) throw io_error("failed while writing event log '" + path + "'");
}

}  // namespace refind
