#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "refind/corpus.hpp"
#include "refind/experience_log.hpp"

namespace refind {

// --- Attributes a question can ask about -----------------------------------

enum class AttributeType { numeric, categorical, boolean };
enum class AttributeSource { metadata, extended_metadata, experience };

/// How a numeric threshold is rendered in the recommendation text.
enum class DisplayUnit { count, bytes, date, fraction };

struct AttributeInfo {
    std::string_view name;
    AttributeType type;
    AttributeSource source;
    std::string_view prompt;
    DisplayUnit unit = DisplayUnit::count;
    std::string_view noun;  // "pages", "authors", ... for count units
};

/// Every askable attribute in catalog order: metadata, then extended
/// metadata, then user experience.
std::span<const AttributeInfo> question_attributes();
const AttributeInfo* find_question_attribute(std::string_view name);

using AttributeValue = std::variant<double, std::string, bool>;

/// The document records together with their experience summaries, indexed
/// by doc_id. Immutable once built; shared across sessions.
class CorpusIndex {
public:
    CorpusIndex() = default;
    /// Documents without a summary get an all-false, zero-coverage one.
    CorpusIndex(std::vector<DocumentRecord> documents, std::vector<ExperienceSummary> summaries);

    static CorpusIndex build(std::vector<DocumentRecord> documents, const ExperienceLog& log);

    std::size_t size() const noexcept { return documents_.size(); }
    std::span<const DocumentRecord> documents() const noexcept { return documents_; }
    std::span<const ExperienceSummary> summaries() const noexcept { return summaries_; }
    std::vector<std::string> doc_ids() const;

    bool contains(std::string_view doc_id) const;
    /// Position of `doc_id` in corpus order. Throws not_found.
    std::size_t index_of(std::string_view doc_id) const;
    /// Throws not_found for an unknown doc_id.
    const DocumentRecord& document(std::string_view doc_id) const;
    const ExperienceSummary& summary(std::string_view doc_id) const;

    /// Throws not_found for an unknown document or attribute.
    AttributeValue attribute(std::string_view doc_id, std::string_view attribute) const;

private:
    std::vector<DocumentRecord> documents_;
    std::vector<ExperienceSummary> summaries_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Corpus statistics extended with the experience attributes (coverage and
/// the experience booleans), which is what the catalog is built from.
CorpusStats compute_catalog_stats(const CorpusIndex& corpus);

// --- Questions and answers ---------------------------------------------------

enum class QuestionKind { binary_split, categorical, boolean, precise_numeric_allowed };
enum class SplitPolicy { mean, median };

std::string_view to_string(QuestionKind k);
std::string_view to_string(SplitPolicy p);
std::optional<SplitPolicy> parse_split_policy(std::string_view s);

struct Question {
    std::string question_id;
    std::string attribute;
    std::string prompt;
    QuestionKind kind = QuestionKind::binary_split;
    std::optional<double> split_threshold;
    /// Recommendation texts shown to the user. For binary splits: option A
    /// ("More than ...") then option B ("Less than or equal to ...").
    std::vector<std::string> options;

    bool accepts_precise() const noexcept {
        return kind == QuestionKind::binary_split || kind == QuestionKind::precise_numeric_allowed;
    }
};

using Catalog = std::vector<Question>;

/// One question per askable attribute present in `stats`. Numeric attributes
/// become binary splits at the mean or median (skipped when min == max);
/// categorical and boolean attributes list their observed values.
Catalog build_catalog(const CorpusStats& stats, SplitPolicy policy = SplitPolicy::mean);

const Question* find_question(const Catalog& catalog, std::string_view question_id);

struct Skip {
    bool operator==(const Skip&) const = default;
};
struct OptionA {
    bool operator==(const OptionA&) const = default;
};
struct OptionB {
    bool operator==(const OptionB&) const = default;
};

/// option A is "more than the threshold", option B "less than or equal".
/// A string is a categorical token, a double a precisely remembered value.
using AnswerValue = std::variant<Skip, OptionA, OptionB, std::string, bool, double>;

struct Answer {
    std::string question_id;
    AnswerValue value;
    double elapsed_s = 0.0;

    bool is_skip() const noexcept { return std::holds_alternative<Skip>(value); }
    bool is_precise() const noexcept { return std::holds_alternative<double>(value); }

    bool operator==(const Answer&) const = default;
};

struct FilterTolerances {
    double rel_tol = 0.25;
};

/// Whether a document whose attribute equals `attr` is consistent with
/// answer `value` to `question`. Throws invalid_argument when the value
/// type does not fit the question.
bool answer_admits(const Question& question, const AnswerValue& value, const AttributeValue& attr,
                   const FilterTolerances& tol = {});

struct SessionState {
    std::string session_id;
    std::vector<std::string> candidate_ids;  // corpus order
    std::vector<Answer> answers;
    std::vector<std::string> asked;

    bool operator==(const SessionState&) const = default;
};

/// A new session whose candidates are the whole corpus.
SessionState start_session(std::string session_id, const CorpusIndex& corpus);

/// The first catalog question not yet asked in the session, if any.
const Question* next_question(const SessionState& session, const Catalog& catalog);

/// Records the answer and keeps only the candidates it admits. A skip
/// leaves the candidates untouched.
///
/// Throws not_found for a question outside the catalog, conflict for a
/// question already answered in this session, invalid_argument for a
/// value that does not fit the question.
SessionState apply_answer(SessionState session, const Answer& answer, const Catalog& catalog,
                          const CorpusIndex& corpus, const FilterTolerances& tol = {});

struct SessionMetrics {
    double T_a = 0.0;  // mean seconds per asked question
    double P_s = 0.0;  // fraction skipped
    double P_e = 0.0;  // fraction answered with a precise value

    bool operator==(const SessionMetrics&) const = default;
};

/// Throws conflict when no question has been asked.
SessionMetrics session_metrics(const SessionState& session);

/// Session transcript (answers with timing) as a JSON document.
std::string session_to_json(const SessionState& session);
SessionState session_from_json(std::string_view text);

}  // namespace refind
