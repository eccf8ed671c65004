#include "refind/question_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "json_util.hpp"
#include "refind/error.hpp"

namespace refind {

namespace {

using AT = AttributeType;
using AS = AttributeSource;
using DU = DisplayUnit;

constexpr std::array<AttributeInfo, 19> kAttributes = {{
    {"file_size", AT::numeric, AS::metadata, "How large do you remember the file is?", DU::bytes, "bytes"},
    {"file_type", AT::categorical, AS::metadata, "What type of file is it?", DU::count, ""},
    {"created_at", AT::numeric, AS::metadata, "When was the document created?", DU::date, ""},
    {"modified_at", AT::numeric, AS::metadata, "When was the document last modified?", DU::date, ""},
    {"last_accessed_at", AT::numeric, AS::metadata, "When did you last open the document?", DU::date, ""},
    {"author_count", AT::numeric, AS::extended_metadata, "How many authors does the document have?", DU::count, "authors"},
    {"pages", AT::numeric, AS::extended_metadata, "How many pages do you remember the document has?", DU::count, "pages"},
    {"image_count", AT::numeric, AS::extended_metadata, "How many images does the document contain?", DU::count, "images"},
    {"table_count", AT::numeric, AS::extended_metadata, "How many tables does the document contain?", DU::count, "tables"},
    {"image_color", AT::categorical, AS::extended_metadata, "Are the images monochrome or colorized?", DU::count, ""},
    {"content_category", AT::categorical, AS::extended_metadata, "What kind of document is it?", DU::count, ""},
    {"difficulty_level", AT::numeric, AS::extended_metadata, "How difficult was it to understand (1-5)?", DU::count, ""},
    {"language", AT::categorical, AS::extended_metadata, "In what language is it written?", DU::count, ""},
    {"has_bibliography", AT::boolean, AS::extended_metadata, "Does it contain a bibliography?", DU::count, ""},
    {"printed", AT::boolean, AS::experience, "Have you printed it before?", DU::count, ""},
    {"refound_before", AT::boolean, AS::experience, "Have you searched for it before?", DU::count, ""},
    {"coverage", AT::numeric, AS::experience, "How much of it have you read?", DU::fraction, ""},
    {"unusual_time_access", AT::boolean, AS::experience, "Did you read it at night or on a weekend?", DU::count, ""},
    {"unusual_location_access", AT::boolean, AS::experience, "Did you read it at an unusual place?", DU::count, ""},
}};

std::string format_number(double x) {
    if (std::abs(x - std::round(x)) < 1e-9) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", std::round(x));
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

std::string format_date(double epoch) {
    const std::time_t t = static_cast<std::time_t>(std::floor(epoch));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
    return buf;
}

std::array<std::string, 2> split_options(const AttributeInfo& info, double threshold) {
    switch (info.unit) {
        case DU::date: {
            const std::string d = format_date(threshold);
            return {"After " + d, "On or before " + d};
        }
        case DU::fraction: {
            const std::string p = format_number(threshold * 100.0) + "%";
            return {"More than " + p + " read", "Less than or equal to " + p + " read"};
        }
        case DU::bytes:
        case DU::count:
        default: {
            std::string suffix = info.noun.empty() ? "" : " " + std::string(info.noun);
            const std::string n = format_number(threshold);
            return {"More than " + n + suffix, "Less than or equal to " + n + suffix};
        }
    }
}

const char* value_kind_name(const AnswerValue& v) {
    switch (v.index()) {
        case 0: return "skip";
        case 1: return "option_a";
        case 2: return "option_b";
        case 3: return "category";
        case 4: return "boolean";
        default: return "precise";
    }
}

}  // namespace

std::span<const AttributeInfo> question_attributes() { return kAttributes; }

const AttributeInfo* find_question_attribute(std::string_view name) {
    for (const auto& a : kAttributes)
        if (a.name == name) return &a;
    return nullptr;
}

// --- CorpusIndex ------------------------------------------------------------

CorpusIndex::CorpusIndex(std::vector<DocumentRecord> documents, std::vector<ExperienceSummary> summaries)
    : documents_(std::move(documents)) {
    std::unordered_map<std::string, ExperienceSummary> given;
    for (auto& s : summaries) given.emplace(s.doc_id, std::move(s));
    summaries_.reserve(documents_.size());
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& id = documents_[i].doc_id;
        if (!by_id_.emplace(id, i).second) throw invalid_argument("duplicate doc_id '" + id + "'");
        auto it = given.find(id);
        if (it != given.end()) {
            summaries_.push_back(it->second);
        } else {
            ExperienceSummary empty;
            empty.doc_id = id;
            summaries_.push_back(std::move(empty));
        }
    }
}

CorpusIndex CorpusIndex::build(std::vector<DocumentRecord> documents, const ExperienceLog& log) {
    std::vector<ExperienceSummary> summaries;
    summaries.reserve(documents.size());
    for (const auto& d : documents) summaries.push_back(summarize_experience(log, d));
    return CorpusIndex(std::move(documents), std::move(summaries));
}

std::vector<std::string> CorpusIndex::doc_ids() const {
    std::vector<std::string> ids;
    ids.reserve(documents_.size());
    for (const auto& d : documents_) ids.push_back(d.doc_id);
    return ids;
}

bool CorpusIndex::contains(std::string_view doc_id) const { return by_id_.count(std::string(doc_id)) != 0; }

std::size_t CorpusIndex::index_of(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    if (it == by_id_.end()) throw not_found("unknown document '" + std::string(doc_id) + "'");
    return it->second;
}

const DocumentRecord& CorpusIndex::document(std::string_view doc_id) const { return documents_[index_of(doc_id)]; }

const ExperienceSummary& CorpusIndex::summary(std::string_view doc_id) const { return summaries_[index_of(doc_id)]; }

AttributeValue CorpusIndex::attribute(std::string_view doc_id, std::string_view name) const {
    const std::size_t pos = index_of(doc_id);
    const DocumentRecord& doc = documents_[pos];
    const ExperienceSummary& s = summaries_[pos];
    if (auto v = numeric_attribute(doc, name)) return *v;
    if (name == "has_bibliography") return doc.has_bibliography;
    if (auto v = categorical_attribute(doc, name)) return *v;
    if (name == "printed") return s.printed;
    if (name == "refound_before") return s.refound_before;
    if (name == "coverage") return s.coverage;
    if (name == "unusual_time_access") return s.unusual_time_access;
    if (name == "unusual_location_access") return s.unusual_location_access;
    throw not_found("unknown document attribute '" + std::string(name) + "'");
}

CorpusStats compute_catalog_stats(const CorpusIndex& corpus) {
    CorpusStats stats = compute_corpus_stats(corpus.documents());
    std::vector<double> coverage;
    coverage.reserve(corpus.size());
    for (const auto& s : corpus.summaries()) coverage.push_back(s.coverage);
    stats.numeric["coverage"] = summarize_numeric(std::move(coverage));
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    for (const auto& s : corpus.summaries()) {
        ++stats.categorical["printed"][flag(s.printed)];
        ++stats.categorical["refound_before"][flag(s.refound_before)];
        ++stats.categorical["unusual_time_access"][flag(s.unusual_time_access)];
        ++stats.categorical["unusual_location_access"][flag(s.unusual_location_access)];
    }
    return stats;
}

// --- Catalog ------------------------------------------------------------------

std::string_view to_string(QuestionKind k) {
    switch (k) {
        case QuestionKind::binary_split: return "binary_split";
        case QuestionKind::categorical: return "categorical";
        case QuestionKind::boolean: return "boolean";
        case QuestionKind::precise_numeric_allowed: return "precise_numeric_allowed";
    }
    return "binary_split";
}

std::string_view to_string(SplitPolicy p) { return p == SplitPolicy::mean ? "mean" : "median"; }

std::optional<SplitPolicy> parse_split_policy(std::string_view s) {
    if (s == "mean") return SplitPolicy::mean;
    if (s == "median") return SplitPolicy::median;
    return std::nullopt;
}

Catalog build_catalog(const CorpusStats& stats, SplitPolicy policy) {
    Catalog catalog;
    for (const auto& info : kAttributes) {
        const std::string name(info.name);
        Question q;
        q.question_id = name;
        q.attribute = name;
        q.prompt = std::string(info.prompt);
        if (info.type == AT::numeric) {
            auto it = stats.numeric.find(name);
            if (it == stats.numeric.end()) continue;
            const NumericSummary& s = it->second;
            if (!(s.min < s.max)) continue;
            q.kind = QuestionKind::binary_split;
            q.split_threshold = policy == SplitPolicy::mean ? s.mean : s.median;
            auto [a, b] = split_options(info, *q.split_threshold);
            q.options = {std::move(a), std::move(b)};
        } else {
            auto it = stats.categorical.find(name);
            if (it == stats.categorical.end()) continue;
            if (info.type == AT::boolean) {
                q.kind = QuestionKind::boolean;
                q.options = {"yes", "no"};
            } else {
                q.kind = QuestionKind::categorical;
                std::vector<std::pair<std::string, std::size_t>> bins(it->second.begin(), it->second.end());
                std::stable_sort(bins.begin(), bins.end(),
                                 [](const auto& x, const auto& y) { return x.second > y.second; });
                for (auto& [token, count] : bins) q.options.push_back(token);
            }
        }
        catalog.push_back(std::move(q));
    }
    return catalog;
}

const Question* find_question(const Catalog& catalog, std::string_view question_id) {
    for (const auto& q : catalog)
        if (q.question_id == question_id) return &q;
    return nullptr;
}

// --- Filtering ----------------------------------------------------------------

bool answer_admits(const Question& q, const AnswerValue& value, const AttributeValue& attr,
                   const FilterTolerances& tol) {
    auto mismatch = [&]() {
        return invalid_argument(std::string("answer of kind '") + value_kind_name(value) +
                                "' does not fit question '" + q.question_id + "' (" +
                                std::string(to_string(q.kind)) + ")");
    };
    auto numeric = [&]() {
        const double* x = std::get_if<double>(&attr);
        if (!x) throw invalid_argument("attribute '" + q.attribute + "' is not numeric");
        return *x;
    };

    if (std::holds_alternative<Skip>(value)) return true;

    if (std::holds_alternative<OptionA>(value) || std::holds_alternative<OptionB>(value)) {
        if (q.kind != QuestionKind::binary_split || !q.split_threshold) throw mismatch();
        const bool above = numeric() > *q.split_threshold;
        return std::holds_alternative<OptionA>(value) ? above : !above;
    }
    if (const double* v = std::get_if<double>(&value)) {
        if (!q.accepts_precise()) throw mismatch();
        const double x = numeric();
        return std::abs(x - *v) <= tol.rel_tol * std::max(std::abs(x), std::abs(*v));
    }
    if (const std::string* token = std::get_if<std::string>(&value)) {
        if (q.kind != QuestionKind::categorical) throw mismatch();
        const std::string* s = std::get_if<std::string>(&attr);
        if (!s) throw invalid_argument("attribute '" + q.attribute + "' is not categorical");
        return *s == *token;
    }
    const bool flag = std::get<bool>(value);
    if (q.kind != QuestionKind::boolean) throw mismatch();
    const bool* b = std::get_if<bool>(&attr);
    if (!b) throw invalid_argument("attribute '" + q.attribute + "' is not boolean");
    return *b == flag;
}

SessionState start_session(std::string session_id, const CorpusIndex& corpus) {
    SessionState s;
    s.session_id = std::move(session_id);
    s.candidate_ids = corpus.doc_ids();
    return s;
}

const Question* next_question(const SessionState& session, const Catalog& catalog) {
    for (const auto& q : catalog) {
        if (std::find(session.asked.begin(), session.asked.end(), q.question_id) == session.asked.end()) return &q;
    }
    return nullptr;
}

SessionState apply_answer(SessionState session, const Answer& answer, const Catalog& catalog,
                          const CorpusIndex& corpus, const FilterTolerances& tol) {
    const Question* q = find_question(catalog, answer.question_id);
    if (!q) throw not_found("unknown question_id '" + answer.question_id + "'");
    if (std::find(session.asked.begin(), session.asked.end(), q->question_id) != session.asked.end())
        throw conflict("question '" + q->question_id + "' was already answered in this session");
    if (!(answer.elapsed_s >= 0.0)) throw invalid_argument("elapsed_s must be non-negative");

    if (!answer.is_skip()) {
        std::vector<std::string> kept;
        kept.reserve(session.candidate_ids.size());
        for (auto& id : session.candidate_ids) {
            if (answer_admits(*q, answer.value, corpus.attribute(id, q->attribute), tol)) kept.push_back(std::move(id));
        }
        session.candidate_ids = std::move(kept);
    } else if (!find_question_attribute(q->attribute) && !session.candidate_ids.empty()) {
        // Surface an unknown attribute even when the answer is a skip.
        (void)corpus.attribute(session.candidate_ids.front(), q->attribute);
    }
    session.asked.push_back(q->question_id);
    session.answers.push_back(answer);
    return session;
}

SessionMetrics session_metrics(const SessionState& session) {
    if (session.answers.empty()) throw conflict("session metrics need at least one asked question");
    double total = 0.0;
    std::size_t skipped = 0, precise = 0;
    for (const auto& a : session.answers) {
        total += a.elapsed_s;
        if (a.is_skip()) ++skipped;
        if (a.is_precise()) ++precise;
    }
    const double n = static_cast<double>(session.answers.size());
    return {total / n, static_cast<double>(skipped) / n, static_cast<double>(precise) / n};
}

// --- Transcript -----------------------------------------------------------------

std::string session_to_json(const SessionState& session) {
    using detail::json;
    json answers = json::array();
    for (const auto& a : session.answers) {
        json entry{{"question_id", a.question_id},
                   {"kind", value_kind_name(a.value)},
                   {"elapsed_s", a.elapsed_s},
                   {"is_precise", a.is_precise()}};
        if (auto* s = std::get_if<std::string>(&a.value)) entry["value"] = *s;
        if (auto* b = std::get_if<bool>(&a.value)) entry["value"] = *b;
        if (auto* d = std::get_if<double>(&a.value)) entry["value"] = *d;
        answers.push_back(std::move(entry));
    }
    json j{{"session_id", session.session_id},
           {"candidate_ids", session.candidate_ids},
           {"asked", session.asked},
           {"answers", answers}};
    if (!session.answers.empty()) {
        const SessionMetrics m = session_metrics(session);
        j["metrics"] = {{"T_a", m.T_a}, {"P_s", m.P_s}, {"P_e", m.P_e}};
    }
    return j.dump();
}

SessionState session_from_json(std::string_view text) {
    using detail::get_as;
    using detail::json;
    const json j = detail::parse_json(text, "session transcript");
    SessionState s;
    s.session_id = get_as<std::string>(j, "session_id");
    s.candidate_ids = get_as<std::vector<std::string>>(j, "candidate_ids");
    s.asked = get_as<std::vector<std::string>>(j, "asked");
    for (const auto& entry : detail::require(j, "answers")) {
        Answer a;
        a.question_id = get_as<std::string>(entry, "question_id");
        a.elapsed_s = get_as<double>(entry, "elapsed_s");
        const auto kind = get_as<std::string>(entry, "kind");
        if (kind == "skip") a.value = Skip{};
        else if (kind == "option_a") a.value = OptionA{};
        else if (kind == "option_b") a.value = OptionB{};
        else if (kind == "category") a.value = get_as<std::string>(entry, "value");
        else if (kind == "boolean") a.value = get_as<bool>(entry, "value");
        else if (kind == "precise") a.value = get_as<double>(entry, "value");
        else throw schema_error("unknown answer kind '" + kind + "'");
        s.answers.push_back(std::move(a));
    }
    if (s.answers.size() != s.asked.size()) throw schema_error("transcript 'asked' and 'answers' lengths differ");
    return s;
}

}  // namespace refind
