#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json_util.hpp"
#include "refind/corpus.hpp"

namespace refind {

namespace {

using detail::get_as;
using detail::get_or;
using detail::json;

DocumentRecord record_from_json(const json& j) {
    DocumentRecord r;
    r.doc_id = get_as<std::string>(j, "doc_id");
    r.path = get_or<std::string>(j, "path", "");
    r.file_size = get_as<std::uint64_t>(j, "file_size");
    r.file_type = get_as<std::string>(j, "file_type");
    r.created_at = get_as<EpochSeconds>(j, "created_at");
    r.modified_at = get_as<EpochSeconds>(j, "modified_at");
    r.last_accessed_at = get_as<EpochSeconds>(j, "last_accessed_at");
    r.author_count = get_as<int>(j, "author_count");
    for (const auto& token : get_or<std::vector<std::string>>(j, "author_genders", {})) {
        auto g = parse_gender(token);
        if (!g) throw schema_error("unknown author gender '" + token + "'");
        r.author_genders.push_back(*g);
    }
    r.pages = get_as<int>(j, "pages");
    r.image_count = get_as<int>(j, "image_count");
    r.table_count = get_as<int>(j, "table_count");
    const auto color = get_as<std::string>(j, "image_color");
    auto parsed_color = parse_image_color(color);
    if (!parsed_color) throw schema_error("unknown image_color '" + color + "'");
    r.image_color = *parsed_color;
    r.content_category = get_as<std::string>(j, "content_category");
    r.difficulty_level = get_as<int>(j, "difficulty_level");
    r.topic_vector = get_as<std::vector<double>>(j, "topic_vector");
    r.language = get_as<std::string>(j, "language");
    r.has_bibliography = get_as<bool>(j, "has_bibliography");
    return r;
}

json record_to_json(const DocumentRecord& r) {
    json genders = json::array();
    for (Gender g : r.author_genders) genders.push_back(std::string(to_string(g)));
    return json{
        {"doc_id", r.doc_id},
        {"path", r.path},
        {"file_size", r.file_size},
        {"file_type", r.file_type},
        {"created_at", r.created_at},
        {"modified_at", r.modified_at},
        {"last_accessed_at", r.last_accessed_at},
        {"author_count", r.author_count},
        {"author_genders", genders},
        {"pages", r.pages},
        {"image_count", r.image_count},
        {"table_count", r.table_count},
        {"image_color", std::string(to_string(r.image_color))},
        {"content_category", r.content_category},
        {"difficulty_level", r.difficulty_level},
        {"topic_vector", r.topic_vector},
        {"language", r.language},
        {"has_bibliography", r.has_bibliography},
    };
}

}  // namespace

CorpusFile read_corpus_jsonl(std::istream& in) {
    CorpusFile corpus;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "corpus line " + std::to_string(line_no);
        try {
            const json j = detail::parse_json(line, where);
            if (!have_header) {
                corpus.vocab = get_as<std::vector<std::string>>(j, "vocab");
                if (j.contains("interest_vector")) {
                    UserProfile p{get_as<std::vector<double>>(j, "interest_vector")};
                    if (p.interest_vector.size() != corpus.vocab.size())
                        throw schema_error("interest_vector dimension does not match vocabulary");
                    if (!is_unit_or_zero(p.interest_vector))
                        throw schema_error("interest_vector must have norm 1");
                    corpus.profile = std::move(p);
                }
                have_header = true;
                continue;
            }
            DocumentRecord r = record_from_json(j);
            auto report = validate_document(r, corpus.vocab.size());
            if (!report.ok()) throw schema_error("invalid record '" + r.doc_id + "': " + report.violations.front());
            if (!seen.insert(r.doc_id).second) throw schema_error("duplicate doc_id '" + r.doc_id + "'");
            corpus.documents.push_back(std::move(r));
        } catch (const Error& e) {
            const std::string msg = e.what();
            throw schema_error(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
        }
    }
    if (!have_header) throw schema_error("corpus file is missing its {\"vocab\": [...]} header line");
    return corpus;
}

CorpusFile read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open corpus file '" + path + "'");
    return read_corpus_jsonl(in);
}

void write_corpus_jsonl(std::ostream& out, const CorpusFile& corpus) {
    json header{{"vocab", corpus.vocab}};
    if (corpus.profile) header["interest_vector"] = corpus.profile->interest_vector;
    out << header.dump() << '\n';
    for (const auto& r : corpus.documents) out << record_to_json(r).dump() << '\n';
}

void write_corpus_file(const std::string& path, const CorpusFile& corpus) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    write_corpus_jsonl(out, corpus);
    if (!out) throw io_error("failed while writing '" + path + "'");
}

}  // namespace refind
