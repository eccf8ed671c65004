#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refind {

using EpochSeconds = std::int64_t;

enum class Gender { male, female, unknown };
enum class ImageColor { monochrome, colorized, none };

std::string_view to_string(Gender g);
std::string_view to_string(ImageColor c);
std::optional<Gender> parse_gender(std::string_view s);
std::optional<ImageColor> parse_image_color(std::string_view s);

/// Inherent attributes of one document: file-system metadata plus the
/// extended metadata that has to be extracted from the content. Records are
/// ingested pre-extracted; nothing here touches the file itself.
///
/// `image_color` is a single value per document even though a document can
/// mix monochrome and colour figures. Producers should report the dominant one.
struct DocumentRecord {
    std::string doc_id;
    std::string path;
    std::uint64_t file_size = 0;
    std::string file_type;
    EpochSeconds created_at = 0;
    EpochSeconds modified_at = 0;
    EpochSeconds last_accessed_at = 0;
    int author_count = 0;
    std::vector<Gender> author_genders;
    int pages = 1;
    int image_count = 0;
    int table_count = 0;
    ImageColor image_color = ImageColor::none;
    std::string content_category;
    int difficulty_level = 1;
    std::vector<double> topic_vector;
    std::string language;
    bool has_bibliography = false;

    bool operator==(const DocumentRecord&) const = default;
};

struct UserProfile {
    std::vector<double> interest_vector;

    bool operator==(const UserProfile&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool mentions(std::string_view needle) const;
};

/// Checks every record invariant and reports all violations at once.
ValidationReport validate_document(const DocumentRecord& record);
/// Same, and additionally checks the topic vector against the corpus vocabulary size.
ValidationReport validate_document(const DocumentRecord& record, std::size_t vocab_size);

/// Returns false when `v` is neither the zero vector nor unit length within 1e-9.
bool is_unit_or_zero(std::span<const double> v);

/// Cosine distance 1 - cos(a, b), in [0, 2]. Either vector being all zero
/// yields 1. Throws invalid_argument on a dimension mismatch.
double cosine_distance(std::span<const double> a, std::span<const double> b);
double topic_distance(const DocumentRecord& doc, const UserProfile& profile);

struct NumericSummary {
    double mean = 0.0;
    double median = 0.0;  // lower middle element for even counts
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;

    bool operator==(const NumericSummary&) const = default;
};

using Histogram = std::map<std::string, std::size_t>;

struct CorpusStats {
    std::size_t document_count = 0;
    std::map<std::string, NumericSummary> numeric;
    std::map<std::string, Histogram> categorical;

    const NumericSummary& numeric_at(std::string_view attribute) const;
    const Histogram& categorical_at(std::string_view attribute) const;
};

/// Throws invalid_argument on an empty input.
NumericSummary summarize_numeric(std::vector<double> values);

/// Numeric and categorical statistics over the inherent document attributes.
/// Throws invalid_argument on an empty corpus.
CorpusStats compute_corpus_stats(std::span<const DocumentRecord> corpus);

/// Names of the numeric inherent attributes, in catalog order.
std::span<const std::string_view> document_numeric_attributes();
/// Names of the categorical and boolean inherent attributes, in catalog order.
std::span<const std::string_view> document_categorical_attributes();

std::optional<double> numeric_attribute(const DocumentRecord& doc, std::string_view name);
/// Booleans are rendered as "true" / "false".
std::optional<std::string> categorical_attribute(const DocumentRecord& doc, std::string_view name);

// --- JSON Lines corpus file ------------------------------------------------

/// A corpus file: a header line `{"vocab": [...]}` (optionally also carrying
/// `"interest_vector": [...]`) followed by one DocumentRecord per line.
struct CorpusFile {
    std::vector<std::string> vocab;
    std::optional<UserProfile> profile;
    std::vector<DocumentRecord> documents;
};

/// Parses and validates a corpus. Throws schema_error naming the offending
/// line for malformed JSON, unknown enum tokens, duplicate ids, or records
/// that fail validation.
CorpusFile read_corpus_jsonl(std::istream& in);
CorpusFile read_corpus_file(const std::string& path);
void write_corpus_jsonl(std::ostream& out, const CorpusFile& corpus);
void write_corpus_file(const std::string& path, const CorpusFile& corpus);

}  // namespace refind
