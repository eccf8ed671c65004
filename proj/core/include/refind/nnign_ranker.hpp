#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "refind/experience_log.hpp"
#include "refind/familiarity_model.hpp"

namespace refind {

struct RankedCandidate {
    std::string doc_id;
    double F_i = 0.0;
    double d = 0.0;  // |F_i - F_t|
    int rank = 0;    // 1-based

    bool operator==(const RankedCandidate&) const = default;
};

struct ScoredCandidate {
    std::string doc_id;
    double F_i = 0.0;
};

/// Orders candidates by familiarity distance |F_i - F_t|, smallest first,
/// ties broken by doc_id ascending. Throws invalid_argument when empty.
std::vector<RankedCandidate> rank_by_familiarity(std::vector<ScoredCandidate> candidates, double F_t);

/// Scores each survivor with the candidate model, then ranks. Scoring is
/// spread over `threads` workers; the result does not depend on the count.
std::vector<RankedCandidate> rank(std::span<const CandidateFeatures> candidates, const CandidateModel& model,
                                  double F_t, unsigned threads = 1);

/// `[{doc_id, F_i, d, rank}, ...]`
std::string ranked_to_json(std::span<const RankedCandidate> ranked);

}  // namespace refind
