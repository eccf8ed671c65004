#include "dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <unordered_set>

#include "refind/error.hpp"

namespace refind::cli {

std::string resolve_data_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("REFIND_DATA_DIR"); env && *env) return env;
    return "refind-data";
}

DataFiles data_files(const std::string& data_dir) {
    const std::filesystem::path dir(data_dir);
    return {(dir / "corpus.jsonl").string(), (dir / "events.jsonl").string(),
            (dir / "candidate_model.json").string(), (dir / "target_model.json").string()};
}

bool file_exists(const std::string& path) { return !path.empty() && std::filesystem::exists(path); }

Dataset load_dataset(const std::string& corpus_path, const std::string& events_path,
                     std::optional<EpochSeconds> now) {
    Dataset data;
    data.corpus = read_corpus_file(corpus_path);
    if (file_exists(events_path)) data.log = read_event_log_file(events_path);

    EpochSeconds latest = 0;
    std::unordered_set<std::string> ids;
    for (const auto& d : data.corpus.documents) {
        latest = std::max({latest, d.created_at, d.modified_at, d.last_accessed_at});
        ids.insert(d.doc_id);
    }
    for (const auto& e : data.log.events()) {
        if (!ids.contains(e.doc_id)) throw schema_error("event log refers to unknown document '" + e.doc_id + "'");
        latest = std::max(latest, e.timestamp);
    }
    data.now = now.value_or(latest);
    data.profile = data.corpus.profile.value_or(UserProfile{std::vector<double>(data.corpus.vocab.size(), 0.0)});
    return data;
}

sim::Environment make_environment(const Dataset& data, SplitPolicy policy) {
    return sim::make_environment(data.corpus.documents, data.log, data.profile, data.now, policy);
}

}  // namespace refind::cli
