#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"
#include "refind/error.hpp"
#include "refind/random.hpp"
#include "refind/simulation.hpp"

namespace refind::sim {

namespace {

constexpr std::array<int, 3> kDefaultKs = {1, 5, 10};
constexpr std::uint64_t kSplitStream = 0x5b117;

std::string fixed(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

}  // namespace

bool classify_difficult(const EpisodeResult& result, const DifficultyPolicy& policy) {
    if (result.wall_time_s > policy.T) return true;
    if (!result.target_survived || !result.target_rank) return true;
    return *result.target_rank > policy.top_k;
}

EvaluationReport evaluate(std::span<const EpisodeResult> results, const DifficultyPolicy& policy,
                          std::span<const int> ks) {
    if (results.empty()) throw invalid_argument("cannot evaluate an empty result set");
    if (ks.empty()) ks = kDefaultKs;

    EvaluationReport rep;
    rep.episodes = results.size();
    for (int k : ks) {
        rep.success_at[k] = 0.0;
        rep.baseline_success_at[k] = 0.0;
    }
    double rank_fraction_sum = 0.0;
    std::size_t difficult = 0;
    for (const auto& r : results) {
        rep.mean_survivors += static_cast<double>(r.survivor_count);
        rep.mean_wall_time_s += r.wall_time_s;
        rep.mean_T_a += r.metrics.T_a;
        rep.mean_P_s += r.metrics.P_s;
        rep.mean_P_e += r.metrics.P_e;
        if (classify_difficult(r, policy)) ++difficult;
        if (!r.target_survived || !r.target_rank) continue;
        ++rep.survived;
        rep.mrr += 1.0 / *r.target_rank;
        rank_fraction_sum += static_cast<double>(*r.target_rank - 1) / static_cast<double>(r.survivor_count);
        if (r.baseline_rank) rep.baseline_mrr += 1.0 / *r.baseline_rank;
        for (int k : ks) {
            if (*r.target_rank <= k) rep.success_at[k] += 1.0;
            if (r.baseline_rank && *r.baseline_rank <= k) rep.baseline_success_at[k] += 1.0;
        }
    }
    const double n = static_cast<double>(results.size());
    rep.mrr /= n;
    rep.baseline_mrr /= n;
    for (auto& [k, v] : rep.success_at) v /= n;
    for (auto& [k, v] : rep.baseline_success_at) v /= n;
    rep.difficult_fraction = static_cast<double>(difficult) / n;
    rep.mean_rank_fraction = rep.survived ? rank_fraction_sum / static_cast<double>(rep.survived) : 0.0;
    rep.mean_survivors /= n;
    rep.mean_wall_time_s /= n;
    rep.mean_T_a /= n;
    rep.mean_P_s /= n;
    rep.mean_P_e /= n;
    return rep;
}

SplitComparison compare_split_parameters(const Environment& env, std::span<const RefindingTask> tasks,
                                         const SimulatedUser& user) {
    if (tasks.size() < 10) throw invalid_argument("too few tasks: need at least 10 to compare split parameters");
    const NumericSummary pages = compute_corpus_stats(env.corpus.documents()).numeric_at("pages");

    SplitComparison out;
    out.mean_threshold = pages.mean;
    out.median_threshold = pages.median;
    std::size_t mean_correct = 0, median_correct = 0;

    for (const auto& task : tasks) {
        const double truth = static_cast<double>(env.corpus.document(task.target_doc_id).pages);
        const double grade = user.true_grade_fn(env.features_of(task.target_doc_id));
        const AnswerProbabilities p = answer_probabilities(user, grade);
        // One set of draws per task, shared by both thresholds.
        Rng rng(derive_seed(derive_seed(user.rng_seed, stable_hash(task.task_id)), kSplitStream));
        const double u_skip = rng.uniform();
        const double u_correct = rng.uniform();
        const double recall_z = rng.normal();
        if (decide(p, u_skip, 1.0, false) == Decision::skip) continue;

        auto answers_correctly = [&](double threshold) {
            const bool above = truth > threshold;
            if (user.forced_correct_p) return u_correct < *user.forced_correct_p;
            switch (user.recall) {
                case RecallModel::coin_flip: return (u_correct < 0.5) == above;
                case RecallModel::proportional_error:
                    return (truth * (1.0 + user.recall_sigma * recall_z) > threshold) == above;
                case RecallModel::grade_based:
                default: return u_correct < p.correct;
            }
        };
        ++out.mean_answers;
        ++out.median_answers;
        if (answers_correctly(out.mean_threshold)) ++mean_correct;
        if (answers_correctly(out.median_threshold)) ++median_correct;
    }
    if (out.mean_answers) out.mean_accuracy = static_cast<double>(mean_correct) / out.mean_answers;
    if (out.median_answers) out.median_accuracy = static_cast<double>(median_correct) / out.median_answers;
    return out;
}

// --- Reports ---------------------------------------------------------------------

std::string report_to_json(const SimulationReport& report) {
    using detail::json;
    const auto& e = report.evaluation;
    json success = json::object(), baseline_success = json::object();
    for (const auto& [k, v] : e.success_at) success[std::to_string(k)] = v;
    for (const auto& [k, v] : e.baseline_success_at) baseline_success[std::to_string(k)] = v;
    json j{
        {"config",
         {{"seed", report.config.seed},
          {"docs", report.config.docs},
          {"tasks", report.config.tasks},
          {"training_tasks", report.config.training_tasks},
          {"policy", std::string(to_string(report.config.policy))},
          {"rel_tol", report.config.rel_tol},
          {"time_budget_s", report.config.time_budget_s},
          {"top_k", report.config.top_k}}},
        {"evaluation",
         {{"episodes", e.episodes},
          {"survived", e.survived},
          {"mrr", e.mrr},
          {"baseline_mrr", e.baseline_mrr},
          {"success_at", success},
          {"baseline_success_at", baseline_success},
          {"difficult_fraction", e.difficult_fraction},
          {"mean_rank_fraction", e.mean_rank_fraction},
          {"mean_survivors", e.mean_survivors},
          {"mean_wall_time_s", e.mean_wall_time_s},
          {"mean_T_a", e.mean_T_a},
          {"mean_P_s", e.mean_P_s},
          {"mean_P_e", e.mean_P_e}}},
        {"models",
         {{"candidate", json::parse(model_to_json(report.models.candidate.linear, ModelKind::candidate))},
          {"target", json::parse(model_to_json(report.models.target.linear, ModelKind::target))}}},
    };
    return j.dump(2) + "\n";
}

std::string report_to_text(const SimulationReport& report) {
    const auto& e = report.evaluation;
    std::vector<std::pair<std::string, std::string>> rows = {
        {"episodes", std::to_string(e.episodes)},
        {"target survived", std::to_string(e.survived)},
        {"MRR (NNiGN)", fixed(e.mrr)},
        {"MRR (random shuffle)", fixed(e.baseline_mrr)},
    };
    for (const auto& [k, v] : e.success_at) rows.emplace_back("success@" + std::to_string(k) + " (NNiGN)", fixed(v));
    for (const auto& [k, v] : e.baseline_success_at)
        rows.emplace_back("success@" + std::to_string(k) + " (random shuffle)", fixed(v));
    rows.emplace_back("difficult fraction", fixed(e.difficult_fraction));
    rows.emplace_back("mean rank fraction", fixed(e.mean_rank_fraction));
    rows.emplace_back("mean survivors", fixed(e.mean_survivors, 2));
    rows.emplace_back("mean wall time (s)", fixed(e.mean_wall_time_s, 2));
    rows.emplace_back("mean T_a (s)", fixed(e.mean_T_a, 2));
    rows.emplace_back("mean P_s", fixed(e.mean_P_s));
    rows.emplace_back("mean P_e", fixed(e.mean_P_e));

    std::size_t width = 0;
    for (const auto& [name, value] : rows) width = std::max(width, name.size());
    std::ostringstream out;
    out << "seed " << report.config.seed << ", " << report.config.docs << " docs, " << report.config.tasks
        << " tasks, policy " << to_string(report.config.policy) << "\n";
    for (const auto& [name, value] : rows) {
        out << name << std::string(width - name.size() + 2, ' ') << value << "\n";
    }
    return out.str();
}

std::string comparison_to_json(const SplitComparison& c) {
    detail::json j{{"mean_threshold", c.mean_threshold},   {"median_threshold", c.median_threshold},
                   {"mean_accuracy", c.mean_accuracy},     {"median_accuracy", c.median_accuracy},
                   {"mean_answers", c.mean_answers},       {"median_answers", c.median_answers}};
    return j.dump(2) + "\n";
}

std::string comparison_to_text(const SplitComparison& c) {
    std::ostringstream out;
    out << "parameter  threshold  answers  accuracy\n";
    char line[128];
    std::snprintf(line, sizeof line, "mean       %9.2f  %7zu  %8.4f\n", c.mean_threshold, c.mean_answers, c.mean_accuracy);
    out << line;
    std::snprintf(line, sizeof line, "median     %9.2f  %7zu  %8.4f\n", c.median_threshold, c.median_answers,
                  c.median_accuracy);
    out << line;
    return out.str();
}

}  // namespace refind::sim
