#include "refind/nnign_ranker.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "json_util.hpp"
#include "refind/error.hpp"

namespace refind {

std::vector<RankedCandidate> rank_by_familiarity(std::vector<ScoredCandidate> candidates, double F_t) {
    if (candidates.empty()) throw invalid_argument("cannot rank an empty candidate set");
    std::vector<RankedCandidate> out;
    out.reserve(candidates.size());
    for (auto& c : candidates) out.push_back({std::move(c.doc_id), c.F_i, std::abs(c.F_i - F_t), 0});
    std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.d != b.d) return a.d < b.d;
        return a.doc_id < b.doc_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
    return out;
}

std::vector<RankedCandidate> rank(std::span<const CandidateFeatures> candidates, const CandidateModel& model,
                                  double F_t, unsigned threads) {
    if (candidates.empty()) throw invalid_argument("cannot rank an empty candidate set");
    if (!model.fitted()) throw conflict("candidate model is not fitted");

    std::vector<ScoredCandidate> scored(candidates.size());
    auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            scored[i] = {candidates[i].doc_id, predict_candidate(model, candidates[i])};
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, candidates.size());
    if (workers == 1) {
        score_range(0, candidates.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (candidates.size() + workers - 1) / workers;
        for (std::size_t begin = 0; begin < candidates.size(); begin += chunk)
            pool.emplace_back(score_range, begin, std::min(candidates.size(), begin + chunk));
    }
    return rank_by_familiarity(std::move(scored), F_t);
}

std::string ranked_to_json(std::span<const RankedCandidate> ranked) {
    detail::json arr = detail::json::array();
    for (const auto& r : ranked) arr.push_back({{"doc_id", r.doc_id}, {"F_i", r.F_i}, {"d", r.d}, {"rank", r.rank}});
    return arr.dump();
}

}  // namespace refind
