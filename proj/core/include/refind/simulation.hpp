#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refind/corpus.hpp"
#include "refind/experience_log.hpp"
#include "refind/familiarity_model.hpp"
#include "refind/nnign_ranker.hpp"
#include "refind/question_engine.hpp"

namespace refind::sim {

// --- Synthetic corpus ----------------------------------------------------------

/// A reproducible personal corpus: documents, their interaction history,
/// the owner's interest profile, and the instant the snapshot was taken.
struct SyntheticWorld {
    std::vector<std::string> vocab;
    UserProfile profile;
    std::vector<DocumentRecord> documents;
    ExperienceLog log;
    EpochSeconds now = 0;

    CorpusFile corpus_file() const;
};

/// Heavy-tailed page counts and sizes, reading histories of uneven density.
/// The same arguments always produce the same world. Throws invalid_argument
/// when n_docs or vocab_size is zero.
SyntheticWorld generate_corpus(std::uint64_t seed, std::size_t n_docs, std::size_t vocab_size = 12);

/// Everything an episode reads: corpus index, per-document features in
/// corpus order, and the question catalog. Immutable once built.
struct Environment {
    CorpusIndex corpus;
    std::vector<CandidateFeatures> features;
    Catalog catalog;
    FilterTolerances tolerances;

    const CandidateFeatures& features_of(std::string_view doc_id) const;
};

Environment make_environment(const SyntheticWorld& world, SplitPolicy policy = SplitPolicy::mean,
                             FilterTolerances tolerances = {});
Environment make_environment(std::vector<DocumentRecord> documents, const ExperienceLog& log,
                             const UserProfile& profile, EpochSeconds now, SplitPolicy policy = SplitPolicy::mean,
                             FilterTolerances tolerances = {});

// --- Tasks -----------------------------------------------------------------------

struct RefindingTask {
    std::string task_id;
    std::string target_doc_id;
    double generation_weight = 0.0;

    bool operator==(const RefindingTask&) const = default;
};

/// Picks a target with probability proportional to 1 + (reading minutes).
/// Throws invalid_argument on an empty corpus.
RefindingTask generate_task(std::span<const DocumentRecord> corpus, const ExperienceLog& log, std::uint64_t seed,
                            std::string task_id = "task-0");

/// `count` tasks with ids <prefix>-0001.., each drawn from its own derived seed.
std::vector<RefindingTask> generate_tasks(std::span<const DocumentRecord> corpus, const ExperienceLog& log,
                                          std::uint64_t master_seed, std::size_t count,
                                          std::string_view id_prefix = "task");

// --- Simulated user ----------------------------------------------------------------

using GradeFn = std::function<double(const CandidateFeatures&)>;

/// g = clamp(c0 + cR R + cC C + cI I + cD D, 1, 10), or unclamped when `clamp` is false.
struct PlantedGrade {
    double intercept = 6.5;
    double r = 0.2;
    double c = 0.03;
    double i = -0.002;
    double d = -3.5;
    bool clamp = true;

    double operator()(const CandidateFeatures& f) const;
};

/// How the user decides which side of a numeric threshold the target is on.
enum class RecallModel {
    grade_based,         // correct with the grade-driven probability
    coin_flip,           // always 50/50
    proportional_error,  // recalls value * (1 + sigma * N(0,1)); error grows with the value
};

std::string_view to_string(RecallModel m);
std::optional<RecallModel> parse_recall_model(std::string_view s);

struct BehaviorParams {
    double base_time_s = 20.0;
    double time_slope_s = 1.5;
    double time_noise_s = 2.0;
    double skip_base = 0.5;
    double skip_slope = 0.05;
    double precise_slope = 0.05;
    double correct_base = 0.5;
    double correct_slope = 0.045;
    double max_probability = 0.95;
    double scan_time_s = 3.0;  // seconds to inspect one ranked result
};

/// Stands in for the person who takes the wizard and grades documents.
struct SimulatedUser {
    std::uint64_t rng_seed = 0;
    GradeFn true_grade_fn = PlantedGrade{};
    BehaviorParams behavior;
    RecallModel recall = RecallModel::grade_based;
    double recall_sigma = 0.5;
    // Overrides bypass the grade-driven formulas and the probability cap.
    std::optional<double> forced_skip_p;
    std::optional<double> forced_precise_p;
    std::optional<double> forced_correct_p;
    bool zero_noise = false;
};

struct AnswerProbabilities {
    double skip = 0.0;
    double precise = 0.0;
    double correct = 0.0;
};

AnswerProbabilities answer_probabilities(const SimulatedUser& user, double grade);
double answer_time(const SimulatedUser& user, double grade, double standard_normal_draw);

enum class Decision { skip, precise, recommendation };

/// Skip iff u_skip < p_skip; otherwise precise iff precise entry is
/// possible and u_precise < p_precise; otherwise pick a recommendation.
/// Monotone in the grade for fixed draws.
Decision decide(const AnswerProbabilities& p, double u_skip, double u_precise, bool precise_allowed);

// --- Episodes --------------------------------------------------------------------

struct Models {
    CandidateModel candidate;
    TargetModel target;
};

struct DifficultyPolicy {
    double T = 300.0;  // seconds
    int top_k = 20;
};

struct WizardRun {
    SessionState session;
    double grade = 0.0;
    double wizard_time_s = 0.0;
};

/// Plays the wizard for one task until the catalog is exhausted or no
/// candidate is left. Draws come from a stream derived from
/// (user.rng_seed, task_id), so runs are order-independent.
WizardRun run_wizard(const RefindingTask& task, const SimulatedUser& user, const Environment& env);

struct EpisodeResult {
    std::string task_id;
    std::string target_doc_id;
    double target_grade = 0.0;
    std::size_t survivor_count = 0;
    bool target_survived = false;
    std::optional<int> target_rank;
    std::optional<int> baseline_rank;  // rank under a seeded random shuffle of the same survivors
    SessionMetrics metrics;
    double F_t = 0.0;
    double wall_time_s = 0.0;
    bool difficult = false;  // per the policy the episode ran under

    bool operator==(const EpisodeResult&) const = default;
};

/// Wizard, then NNiGN ranking of the survivors. Throws conflict when the
/// models are unfitted.
EpisodeResult simulate_episode(const RefindingTask& task, const SimulatedUser& user, const Environment& env,
                               const Models& models, const DifficultyPolicy& policy = {});

/// Runs every task; `threads` only changes speed, never results.
std::vector<EpisodeResult> simulate_episodes(std::span<const RefindingTask> tasks, const SimulatedUser& user,
                                             const Environment& env, const Models& models,
                                             const DifficultyPolicy& policy = {}, unsigned threads = 1);

/// F_t used when the session has no answers yet: the target model's
/// intercept, i.e. the prediction at the training means.
double neutral_target_familiarity(const TargetModel& model);

struct TrainingSets {
    std::vector<TrainingExample> candidate;
    std::vector<TrainingExample> target;
};

/// Candidate examples grade every corpus document; target examples pair
/// each task's wizard metrics with the target's grade. Throws
/// invalid_argument for fewer than two tasks.
TrainingSets build_training_sets(const Environment& env, std::span<const RefindingTask> tasks,
                                 const SimulatedUser& user);

Models fit_models(const TrainingSets& sets);

// --- Evaluation --------------------------------------------------------------------

bool classify_difficult(const EpisodeResult& result, const DifficultyPolicy& policy = {});

struct EvaluationReport {
    std::size_t episodes = 0;
    std::size_t survived = 0;
    double mrr = 0.0;
    double baseline_mrr = 0.0;
    std::map<int, double> success_at;
    std::map<int, double> baseline_success_at;
    double difficult_fraction = 0.0;
    double mean_rank_fraction = 0.0;  // mean of (rank - 1) / survivors over survived episodes
    double mean_survivors = 0.0;
    double mean_wall_time_s = 0.0;
    double mean_T_a = 0.0;
    double mean_P_s = 0.0;
    double mean_P_e = 0.0;
};

/// Throws invalid_argument on empty input.
EvaluationReport evaluate(std::span<const EpisodeResult> results, const DifficultyPolicy& policy = {},
                          std::span<const int> ks = {});

struct SplitComparison {
    double mean_threshold = 0.0;
    double median_threshold = 0.0;
    double mean_accuracy = 0.0;
    double median_accuracy = 0.0;
    std::size_t mean_answers = 0;
    std::size_t median_answers = 0;
};

/// Asks every task's page question once under each split policy and scores
/// the fraction of non-skipped answers on the correct side. Throws
/// invalid_argument for fewer than ten tasks.
SplitComparison compare_split_parameters(const Environment& env, std::span<const RefindingTask> tasks,
                                         const SimulatedUser& user);

// --- Configuration and the end-to-end run ---------------------------------------

struct SimulationConfig {
    std::uint64_t seed = 42;
    std::size_t docs = 500;
    std::size_t tasks = 200;
    std::size_t training_tasks = 200;
    std::size_t vocab_size = 12;
    SplitPolicy policy = SplitPolicy::mean;
    double rel_tol = 0.25;
    std::vector<int> k_values = {1, 5, 10};
    double time_budget_s = 300.0;
    int top_k = 20;
    unsigned threads = 1;
    BehaviorParams behavior;
    PlantedGrade grade;
    RecallModel recall = RecallModel::grade_based;
    double recall_sigma = 0.5;
    std::size_t compare_tasks = 2400;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and bad
/// values throw invalid_argument naming the line.
SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config_file(const std::string& path);
std::string config_to_text(const SimulationConfig& config);

SimulatedUser make_user(const SimulationConfig& config);

struct SimulationReport {
    SimulationConfig config;
    EvaluationReport evaluation;
    Models models;
    std::vector<EpisodeResult> episodes;
};

/// Corpus -> training tasks -> fitted models -> evaluation episodes -> report.
SimulationReport run_simulation(const SimulationConfig& config);

std::string report_to_json(const SimulationReport& report);
std::string report_to_text(const SimulationReport& report);
std::string comparison_to_json(const SplitComparison& c);
std::string comparison_to_text(const SplitComparison& c);

}  // namespace refind::sim
