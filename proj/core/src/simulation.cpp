#include <algorithm>
#include <cmath>
#include <thread>

#include "refind/error.hpp"
#include "refind/random.hpp"
#include "refind/simulation.hpp"

namespace refind::sim {

namespace {

constexpr std::uint64_t kBaselineStream = 0xba5e11e;

/// The draws for one question, always taken in the same order; a
/// change in one branch never shifts the stream for later questions.
struct QuestionDraws {
    double time_z;
    double u_skip;
    double u_precise;
    double u_correct;
    double u_choice;
    double recall_z;
};

QuestionDraws draw_question(Rng& rng) {
    QuestionDraws d{};
    d.time_z = rng.normal();
    d.u_skip = rng.uniform();
    d.u_precise = rng.uniform();
    d.u_correct = rng.uniform();
    d.u_choice = rng.uniform();
    d.recall_z = rng.normal();
    return d;
}

double clamp_probability(double p, double cap) { return std::clamp(p, 0.0, cap); }

/// Whether the user puts the target on the "more than" side.
bool believes_above(const SimulatedUser& user, const AnswerProbabilities& p, double value, double threshold,
                    const QuestionDraws& draws) {
    const bool truth = value > threshold;
    if (user.forced_correct_p) return draws.u_correct < *user.forced_correct_p ? truth : !truth;
    switch (user.recall) {
        case RecallModel::coin_flip: return draws.u_correct < 0.5;
        case RecallModel::proportional_error: {
            const double recalled = value * (1.0 + user.recall_sigma * draws.recall_z);
            return recalled > threshold;
        }
        case RecallModel::grade_based:
        default: return draws.u_correct < p.correct ? truth : !truth;
    }
}

bool recalls_correctly(const SimulatedUser& user, const AnswerProbabilities& p, const QuestionDraws& draws) {
    if (user.forced_correct_p) return draws.u_correct < *user.forced_correct_p;
    if (user.recall == RecallModel::coin_flip) return draws.u_correct < 0.5;
    return draws.u_correct < p.correct;
}

AnswerValue choose_answer(const Question& q, const AttributeValue& truth, const SimulatedUser& user,
                          const AnswerProbabilities& p, const QuestionDraws& draws) {
    switch (q.kind) {
        case QuestionKind::binary_split:
        case QuestionKind::precise_numeric_allowed: {
            const double value = std::get<double>(truth);
            if (!q.split_threshold) return value;
            if (believes_above(user, p, value, *q.split_threshold, draws)) return OptionA{};
            return OptionB{};
        }
        case QuestionKind::boolean: {
            const bool value = std::get<bool>(truth);
            return recalls_correctly(user, p, draws) ? value : !value;
        }
        case QuestionKind::categorical:
        default: {
            const std::string& value = std::get<std::string>(truth);
            if (recalls_correctly(user, p, draws)) return value;
            std::vector<std::string> wrong;
            for (const auto& opt : q.options)
                if (opt != value) wrong.push_back(opt);
            if (wrong.empty()) return value;
            const auto pick = std::min(wrong.size() - 1, static_cast<std::size_t>(draws.u_choice * wrong.size()));
            return wrong[pick];
        }
    }
}

Rng episode_stream(const SimulatedUser& user, std::string_view task_id, std::uint64_t salt = 0) {
    return Rng(derive_seed(derive_seed(user.rng_seed, stable_hash(task_id)), salt));
}

}  // namespace

double PlantedGrade::operator()(const CandidateFeatures& f) const {
    const double g = intercept + r * f.R + c * f.C + i * f.I + d * f.D;
    return clamp ? std::clamp(g, 1.0, 10.0) : g;
}

std::string_view to_string(RecallModel m) {
    switch (m) {
        case RecallModel::grade_based: return "grade_based";
        case RecallModel::coin_flip: return "coin_flip";
        case RecallModel::proportional_error: return "proportional_error";
    }
    return "grade_based";
}

std::optional<RecallModel> parse_recall_model(std::string_view s) {
    if (s == "grade_based") return RecallModel::grade_based;
    if (s == "coin_flip") return RecallModel::coin_flip;
    if (s == "proportional_error") return RecallModel::proportional_error;
    return std::nullopt;
}

AnswerProbabilities answer_probabilities(const SimulatedUser& user, double g) {
    const auto& b = user.behavior;
    AnswerProbabilities p;
    p.skip = user.forced_skip_p.value_or(clamp_probability(b.skip_base - b.skip_slope * g, b.max_probability));
    p.precise = user.forced_precise_p.value_or(clamp_probability(b.precise_slope * g, b.max_probability));
    p.correct = user.forced_correct_p.value_or(clamp_probability(b.correct_base + b.correct_slope * g, b.max_probability));
    return p;
}

double answer_time(const SimulatedUser& user, double g, double z) {
    const auto& b = user.behavior;
    const double noise = user.zero_noise ? 0.0 : b.time_noise_s * z;
    return std::max(0.0, b.base_time_s - b.time_slope_s * g + noise);
}

Decision decide(const AnswerProbabilities& p, double u_skip, double u_precise, bool precise_allowed) {
    if (u_skip < p.skip) return Decision::skip;
    if (precise_allowed && u_precise < p.precise) return Decision::precise;
    return Decision::recommendation;
}

WizardRun run_wizard(const RefindingTask& task, const SimulatedUser& user, const Environment& env) {
    WizardRun run;
    run.session = start_session(task.task_id, env.corpus);
    run.grade = user.true_grade_fn(env.features_of(task.target_doc_id));
    const AnswerProbabilities p = answer_probabilities(user, run.grade);
    Rng rng = episode_stream(user, task.task_id);

    for (const Question& q : env.catalog) {
        if (run.session.candidate_ids.empty()) break;
        const QuestionDraws draws = draw_question(rng);
        const AttributeValue truth = env.corpus.attribute(task.target_doc_id, q.attribute);

        Answer answer;
        answer.question_id = q.question_id;
        answer.elapsed_s = answer_time(user, run.grade, draws.time_z);
        switch (decide(p, draws.u_skip, draws.u_precise, q.accepts_precise())) {
            case Decision::skip: answer.value = Skip{}; break;
            case Decision::precise: answer.value = std::get<double>(truth); break;
            case Decision::recommendation: answer.value = choose_answer(q, truth, user, p, draws); break;
        }
        run.wizard_time_s += answer.elapsed_s;
        run.session = apply_answer(std::move(run.session), answer, env.catalog, env.corpus, env.tolerances);
    }
    return run;
}

double neutral_target_familiarity(const TargetModel& model) {
    if (!model.fitted()) throw conflict("target model is not fitted");
    return model.linear.coefficients.front();
}

EpisodeResult simulate_episode(const RefindingTask& task, const SimulatedUser& user, const Environment& env,
                               const Models& models, const DifficultyPolicy& policy) {
    if (!models.candidate.fitted() || !models.target.fitted()) throw conflict("models are not fitted");

    WizardRun run = run_wizard(task, user, env);
    EpisodeResult r;
    r.task_id = task.task_id;
    r.target_doc_id = task.target_doc_id;
    r.target_grade = run.grade;
    r.survivor_count = run.session.candidate_ids.size();
    if (!run.session.answers.empty()) {
        r.metrics = session_metrics(run.session);
        r.F_t = predict_target(models.target, r.metrics);
    } else {
        r.F_t = neutral_target_familiarity(models.target);
    }

    const auto& survivors = run.session.candidate_ids;
    r.target_survived = std::find(survivors.begin(), survivors.end(), task.target_doc_id) != survivors.end();
    if (r.target_survived) {
        std::vector<CandidateFeatures> features;
        features.reserve(survivors.size());
        for (const auto& id : survivors) features.push_back(env.features_of(id));
        const auto ranked = rank(features, models.candidate, r.F_t);
        for (const auto& rc : ranked)
            if (rc.doc_id == task.target_doc_id) r.target_rank = rc.rank;

        std::vector<std::string> shuffled = survivors;
        Rng rng = episode_stream(user, task.task_id, kBaselineStream);
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
        const auto pos = std::find(shuffled.begin(), shuffled.end(), task.target_doc_id) - shuffled.begin();
        r.baseline_rank = static_cast<int>(pos) + 1;
    }

    const double inspected = r.target_rank ? static_cast<double>(*r.target_rank) : static_cast<double>(r.survivor_count);
    r.wall_time_s = run.wizard_time_s + user.behavior.scan_time_s * inspected;
    r.difficult = classify_difficult(r, policy);
    return r;
}

std::vector<EpisodeResult> simulate_episodes(std::span<const RefindingTask> tasks, const SimulatedUser& user,
                                             const Environment& env, const Models& models,
                                             const DifficultyPolicy& policy, unsigned threads) {
    std::vector<EpisodeResult> results(tasks.size());
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, tasks.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = simulate_episode(tasks[i], user, env, models, policy);
        return results;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < tasks.size(); i += workers)
                        results[i] = simulate_episode(tasks[i], user, env, models, policy);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

TrainingSets build_training_sets(const Environment& env, std::span<const RefindingTask> tasks,
                                 const SimulatedUser& user) {
    if (tasks.size() < 2) throw invalid_argument("too few tasks: need at least 2 to build training sets");
    TrainingSets sets;
    sets.candidate.reserve(env.features.size());
    for (const auto& f : env.features) sets.candidate.push_back({feature_vector(f), user.true_grade_fn(f)});
    sets.target.reserve(tasks.size());
    for (const auto& task : tasks) {
        const WizardRun run = run_wizard(task, user, env);
        if (run.session.answers.empty()) throw invalid_argument("catalog is empty: no wizard metrics to train on");
        sets.target.push_back({feature_vector(session_metrics(run.session)), run.grade});
    }
    return sets;
}

Models fit_models(const TrainingSets& sets) {
    return {fit_candidate_model(sets.candidate), fit_target_model(sets.target)};
}

}  // namespace refind::sim
