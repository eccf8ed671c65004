#include "refind/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "refind/error.hpp"

namespace refind {

namespace {

constexpr double kUnitTolerance = 1e-9;

constexpr std::array<std::string_view, 9> kNumericAttributes = {
    "file_size",    "created_at",  "modified_at", "last_accessed_at", "author_count",
    "pages",        "image_count", "table_count", "difficulty_level",
};

constexpr std::array<std::string_view, 5> kCategoricalAttributes = {
    "file_type", "image_color", "content_category", "language", "has_bibliography",
};

double norm(std::span<const double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        case Gender::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(ImageColor c) {
    switch (c) {
        case ImageColor::monochrome: return "monochrome";
        case ImageColor::colorized: return "colorized";
        case ImageColor::none: return "none";
    }
    return "none";
}

std::optional<Gender> parse_gender(std::string_view s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    if (s == "unknown") return Gender::unknown;
    return std::nullopt;
}

std::optional<ImageColor> parse_image_color(std::string_view s) {
    if (s == "monochrome") return ImageColor::monochrome;
    if (s == "colorized") return ImageColor::colorized;
    if (s == "none") return ImageColor::none;
    return std::nullopt;
}

bool ValidationReport::mentions(std::string_view needle) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

bool is_unit_or_zero(std::span<const double> v) {
    if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) return false;
    if (all_zero(v)) return true;
    return std::abs(norm(v) - 1.0) <= kUnitTolerance;
}

ValidationReport validate_document(const DocumentRecord& r) {
    ValidationReport report;
    auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (r.doc_id.empty()) fail("doc_id must be non-empty");
    if (r.pages < 1) fail("pages >= 1 violated (pages = " + std::to_string(r.pages) + ")");
    if (r.author_count < 0) fail("author_count >= 0 violated");
    if (r.image_count < 0) fail("image_count >= 0 violated");
    if (r.table_count < 0) fail("table_count >= 0 violated");
    if (r.created_at > r.modified_at) fail("created_at <= modified_at ordering violated");
    if (r.difficulty_level < 1 || r.difficulty_level > 5) fail("difficulty_level must be in 1..5");
    if (!r.author_genders.empty() && static_cast<int>(r.author_genders.size()) != r.author_count)
        fail("author_genders length must equal author_count");
    if (std::any_of(r.topic_vector.begin(), r.topic_vector.end(), [](double x) { return x < 0.0; }))
        fail("topic_vector entries must be non-negative");
    if (!is_unit_or_zero(r.topic_vector)) fail("topic_vector must have norm 1 (or be all zero)");
    return report;
}

ValidationReport validate_document(const DocumentRecord& r, std::size_t vocab_size) {
    ValidationReport report = validate_document(r);
    if (r.topic_vector.size() != vocab_size) {
        report.violations.push_back("topic_vector dimension " + std::to_string(r.topic_vector.size()) +
                                    " does not match vocabulary size " + std::to_string(vocab_size));
    }
    return report;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw invalid_argument("vocabulary mismatch: topic vectors have dimensions " +
                               std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 1.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    const double cos = std::clamp(dot / (na * nb), -1.0, 1.0);
    return 1.0 - cos;
}

double topic_distance(const DocumentRecord& doc, const UserProfile& profile) {
    return cosine_distance(doc.topic_vector, profile.interest_vector);
}

const NumericSummary& CorpusStats::numeric_at(std::string_view attribute) const {
    auto it = numeric.find(std::string(attribute));
    if (it == numeric.end()) throw not_found("no numeric statistics for attribute '" + std::string(attribute) + "'");
    return it->second;
}

const Histogram& CorpusStats::categorical_at(std::string_view attribute) const {
    auto it = categorical.find(std::string(attribute));
    if (it == categorical.end()) throw not_found("no histogram for attribute '" + std::string(attribute) + "'");
    return it->second;
}

NumericSummary summarize_numeric(std::vector<double> values) {
    if (values.empty()) throw invalid_argument("cannot summarize an empty column");
    NumericSummary s;
    s.count = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.median = values[(values.size() - 1) / 2];
    // Rounding in the sum can push the mean a hair outside the range.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

CorpusStats compute_corpus_stats(std::span<const DocumentRecord> corpus) {
    if (corpus.empty()) throw invalid_argument("empty corpus: statistics need at least one document");
    CorpusStats stats;
    stats.document_count = corpus.size();
    for (std::string_view name : kNumericAttributes) {
        std::vector<double> column;
        column.reserve(corpus.size());
        for (const auto& doc : corpus) column.push_back(*numeric_attribute(doc, name));
        stats.numeric.emplace(std::string(name), summarize_numeric(std::move(column)));
    }
    for (std::string_view name : kCategoricalAttributes) {
        Histogram& h = stats.categorical[std::string(name)];
        for (const auto& doc : corpus) ++h[*categorical_attribute(doc, name)];
    }
    return stats;
}

std::span<const std::string_view> document_numeric_attributes() { return kNumericAttributes; }
std::span<const std::string_view> document_categorical_attributes() { return kCategoricalAttributes; }

std::optional<double> numeric_attribute(const DocumentRecord& d, std::string_view name) {
    if (name == "file_size") return static_cast<double>(d.file_size);
    if (name == "created_at") return static_cast<double>(d.created_at);
    if (name == "modified_at") return static_cast<double>(d.modified_at);
    if (name == "last_accessed_at") return static_cast<double>(d.last_accessed_at);
    if (name == "author_count") return d.author_count;
    if (name == "pages") return d.pages;
    if (name == "image_count") return d.image_count;
    if (name == "table_count") return d.table_count;
    if (name == "difficulty_level") return d.difficulty_level;
    return std::nullopt;
}

std::optional<std::string> categorical_attribute(const DocumentRecord& d, std::string_view name) {
    if (name == "file_type") return d.file_type;
    if (name == "image_color") return std::string(to_string(d.image_color));
    if (name == "content_category") return d.content_category;
    if (name == "language") return d.language;
    if (name == "has_bibliography") return std::string(d.has_bibliography ? "true" : "false");
    return std::nullopt;
}

}  // namespace refind
