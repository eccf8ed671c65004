#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refind/experience_log.hpp"
#include "refind/question_engine.hpp"

namespace refind {

/// One graded observation: raw (unstandardized) features and a 1-10 grade.
struct TrainingExample {
    std::vector<double> features;
    double grade = 0.0;
};

/// Ridge penalty applied to slope coefficients; the intercept is not penalized.
inline constexpr double kRidgeLambda = 1e-8;

/// A linear model over z-scored features.
///
///     y = coefficients[0] + sum_j coefficients[j+1] * (x_j - means[j]) / stds[j]
///
/// Default-constructed models are unfitted and refuse to predict.
struct LinearModel {
    std::vector<double> coefficients;  // intercept first
    std::vector<double> means;
    std::vector<double> stds;

    bool fitted() const noexcept { return !coefficients.empty(); }
    std::size_t dimension() const noexcept { return means.size(); }

    /// Throws conflict when unfitted, invalid_argument on a dimension mismatch.
    double predict(std::span<const double> features) const;

    bool operator==(const LinearModel&) const = default;
};

/// Least squares on z-scored features with ridge lambda on the slopes,
/// solved through the normal equations. Constant feature columns get std 1.
///
/// Throws invalid_argument for fewer than two examples, ragged feature
/// vectors, or grades outside [1, 10].
LinearModel fit_linear(std::span<const TrainingExample> examples, double ridge_lambda = kRidgeLambda);

/// Familiarity of a candidate from (R, C, I, D).
struct CandidateModel {
    static constexpr std::size_t kDimension = 4;
    LinearModel linear;

    bool fitted() const noexcept { return linear.fitted(); }
    bool operator==(const CandidateModel&) const = default;
};

/// Familiarity of the target from the wizard behaviour (T_a, P_s, P_e).
struct TargetModel {
    static constexpr std::size_t kDimension = 3;
    LinearModel linear;

    bool fitted() const noexcept { return linear.fitted(); }
    bool operator==(const TargetModel&) const = default;
};

std::vector<double> feature_vector(const CandidateFeatures& f);
std::vector<double> feature_vector(const SessionMetrics& m);

CandidateModel fit_candidate_model(std::span<const TrainingExample> examples);
TargetModel fit_target_model(std::span<const TrainingExample> examples);

/// Predictions are not clamped to the grade scale.
double predict_candidate(const CandidateModel& model, const CandidateFeatures& f);
double predict_target(const TargetModel& model, const SessionMetrics& m);

// --- Persistence ----------------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

enum class ModelKind { candidate, target };

/// {schema_version, kind, coefficients[], means[], stds[]}
std::string model_to_json(const LinearModel& model, ModelKind kind);
/// Throws schema_error on a version, kind, or shape problem.
LinearModel model_from_json(std::string_view text, ModelKind expected_kind);

void save_model(const CandidateModel& model, const std::string& path);
void save_model(const TargetModel& model, const std::string& path);
CandidateModel load_candidate_model(const std::string& path);
TargetModel load_target_model(const std::string& path);

/// Reads training examples from JSON Lines: `{"features": [...], "grade": g}`.
std::vector<TrainingExample> read_training_examples(std::istream& in);
void write_training_examples(std::ostream& out, std::span<const TrainingExample> examples);

}  // namespace refind
