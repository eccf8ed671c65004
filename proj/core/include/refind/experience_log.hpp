#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "refind/corpus.hpp"

namespace refind {

enum class EventKind { open, close, page_view, print, refind, annotate };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

/// One logged interaction with a document.
///
/// `page` and `duration_s` are present exactly for page views. The optional
/// tags mark the access as happening at an unusual time or place; tagging is
/// done upstream by whoever records the event, any non-empty token counts.
struct ExperienceEvent {
    std::string doc_id;
    EventKind kind = EventKind::open;
    EpochSeconds timestamp = 0;
    std::optional<int> page;
    std::optional<double> duration_s;
    std::optional<std::string> location_tag;
    std::optional<std::string> time_tag;

    bool operator==(const ExperienceEvent&) const = default;
};

/// Throws invalid_argument describing the first violated invariant.
void validate_event(const ExperienceEvent& event);

/// Familiarity features of one document: R (open count), C (reading minutes),
/// I (days since last access), D (topic distance from the user's interests).
struct CandidateFeatures {
    std::string doc_id;
    double R = 0.0;
    double C = 0.0;
    double I = 0.0;
    double D = 0.0;

    bool operator==(const CandidateFeatures&) const = default;
};

struct ExperienceSummary {
    std::string doc_id;
    bool printed = false;
    bool refound_before = false;
    double coverage = 0.0;
    bool unusual_time_access = false;
    bool unusual_location_access = false;

    bool operator==(const ExperienceSummary&) const = default;
};

/// Append-only interaction log with a per-document index.
///
/// Appends must be serialized by the owner. A copy is an immutable snapshot:
/// derive features from a `const ExperienceLog&` while appends continue on
/// the original.
class ExperienceLog {
public:
    /// Validates and appends. Throws invalid_argument on a malformed event.
    void append(ExperienceEvent event);

    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    std::span<const ExperienceEvent> events() const noexcept { return events_; }

    /// Positions of `doc_id`'s events, in insertion order.
    std::span<const std::size_t> positions_for(std::string_view doc_id) const;

private:
    std::vector<ExperienceEvent> events_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_doc_;
};

constexpr double kSecondsPerDay = 86400.0;

CandidateFeatures derive_features(const ExperienceLog& log, const DocumentRecord& doc,
                                  const UserProfile& profile, EpochSeconds now);

/// Cumulative reading minutes of a document (the C feature alone).
double cumulative_minutes(const ExperienceLog& log, std::string_view doc_id);

ExperienceSummary summarize_experience(const ExperienceLog& log, const DocumentRecord& doc);

// --- JSON Lines event file -------------------------------------------------

std::string event_to_json_line(const ExperienceEvent& event);
/// Throws schema_error on malformed JSON, invalid_argument on a malformed event.
ExperienceEvent event_from_json_line(std::string_view line);

/// Reads every event in file order. Blank lines are ignored.
ExperienceLog read_event_log(std::istream& in);
ExperienceLog read_event_log_file(const std::string& path);
void write_event_log(std::ostream& out, const ExperienceLog& log);

/// Appends a single event to a JSON Lines file, creating it if needed.
void append_event_to_file(const std::string& path, const ExperienceEvent& event);

}  // namespace refind
