#pragma once

#include <optional>
#include <string>

#include "refind/corpus.hpp"
#include "refind/experience_log.hpp"
#include "refind/simulation.hpp"

namespace refind::cli {

/// Where corpus, events and models live: --data-dir, else $REFIND_DATA_DIR,
/// else ./refind-data.
std::string resolve_data_dir(const std::string& flag);

struct DataFiles {
    std::string corpus;
    std::string events;
    std::string candidate_model;
    std::string target_model;
};

DataFiles data_files(const std::string& data_dir);

struct Dataset {
    CorpusFile corpus;
    ExperienceLog log;
    UserProfile profile;
    EpochSeconds now = 0;
};

/// Reads a corpus and, when the path is non-empty and exists, its event log.
/// Every event must refer to a document in the corpus. `now` defaults to the
/// latest timestamp seen in either file.
Dataset load_dataset(const std::string& corpus_path, const std::string& events_path,
                     std::optional<EpochSeconds> now = std::nullopt);

sim::Environment make_environment(const Dataset& data, SplitPolicy policy = SplitPolicy::mean);

bool file_exists(const std::string& path);

}  // namespace refind::cli
