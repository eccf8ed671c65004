#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "refind/corpus.hpp"
#include "refind/experience_log.hpp"

namespace refind::testing {

/// A valid document with neutral attributes; tweak fields after creation.
inline DocumentRecord make_doc(std::string id, int pages = 10, std::size_t vocab = 2) {
    DocumentRecord d;
    d.doc_id = std::move(id);
    d.path = "docs/" + d.doc_id + ".pdf";
    d.file_size = 1000;
    d.file_type = "pdf";
    d.created_at = 1'000'000;
    d.modified_at = 1'000'000;
    d.last_accessed_at = 1'000'000;
    d.pages = pages;
    d.content_category = "report";
    d.difficulty_level = 3;
    d.topic_vector.assign(vocab, 0.0);
    if (vocab > 0) d.topic_vector[0] = 1.0;
    d.language = "en";
    return d;
}

inline std::vector<DocumentRecord> docs_with_pages(const std::vector<int>& pages) {
    std::vector<DocumentRecord> out;
    for (std::size_t i = 0; i < pages.size(); ++i) out.push_back(make_doc("d" + std::to_string(i + 1), pages[i]));
    return out;
}

inline ExperienceEvent open_event(std::string doc, EpochSeconds t) {
    return {std::move(doc), EventKind::open, t, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
}

inline ExperienceEvent view_event(std::string doc, EpochSeconds t, int page, double seconds) {
    return {std::move(doc), EventKind::page_view, t, page, seconds, std::nullopt, std::nullopt};
}

inline ExperienceEvent simple_event(std::string doc, EventKind kind, EpochSeconds t) {
    return {std::move(doc), kind, t, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("refind-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace refind::testing
