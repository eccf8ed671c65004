#include "refind/familiarity_model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json_util.hpp"
#include "refind/error.hpp"

namespace refind {

namespace {

using detail::json;

// Column standard deviations at or below this (relative to the column mean)
// are treated as constant.
constexpr double kDegenerateStd = 1e-12;

/// In-place Cholesky solve of the symmetric positive definite system A x = b
/// (row-major p x p).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t p) {
    for (std::size_t j = 0; j < p; ++j) {
        double diag = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
        if (!(diag > 0.0)) throw invalid_argument("normal equations are not positive definite");
        const double ljj = std::sqrt(diag);
        a[j * p + j] = ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = s / ljj;
        }
    }
    // L y = b
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * p + k] * b[k];
        b[i] = s / a[i * p + i];
    }
    // L^T x = y
    for (std::size_t ii = p; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < p; ++k) s -= a[k * p + ii] * b[k];
        b[ii] = s / a[ii * p + ii];
    }
    return b;
}

std::string_view kind_name(ModelKind k) { return k == ModelKind::candidate ? "candidate" : "target"; }

std::size_t kind_dimension(ModelKind k) {
    return k == ModelKind::candidate ? CandidateModel::kDimension : TargetModel::kDimension;
}

std::string read_whole_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_whole_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << text << '\n';
    if (!out) throw io_error("failed while writing '" + path + "'");
}

}  // namespace

double LinearModel::predict(std::span<const double> x) const {
    if (!fitted()) throw conflict("model is not fitted");
    if (x.size() != means.size())
        throw invalid_argument("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                               std::to_string(means.size()));
    double y = coefficients[0];
    for (std::size_t j = 0; j < x.size(); ++j) y += coefficients[j + 1] * (x[j] - means[j]) / stds[j];
    return y;
}

LinearModel fit_linear(std::span<const TrainingExample> examples, double ridge_lambda) {
    if (examples.size() < 2)
        throw invalid_argument("too few examples: need at least 2, got " + std::to_string(examples.size()));
    const std::size_t d = examples.front().features.size();
    for (const auto& ex : examples) {
        if (ex.features.size() != d) throw invalid_argument("dimension mismatch among training examples");
        if (!(ex.grade >= 1.0 && ex.grade <= 10.0)) throw invalid_argument("grade outside [1, 10]");
        for (double x : ex.features)
            if (!std::isfinite(x)) throw invalid_argument("non-finite feature value");
    }
    const double n = static_cast<double>(examples.size());

    LinearModel model;
    model.means.assign(d, 0.0);
    model.stds.assign(d, 0.0);
    for (const auto& ex : examples)
        for (std::size_t j = 0; j < d; ++j) model.means[j] += ex.features[j];
    for (double& m : model.means) m /= n;
    for (const auto& ex : examples)
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = ex.features[j] - model.means[j];
            model.stds[j] += dev * dev;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double s = std::sqrt(model.stds[j] / n);
        model.stds[j] = s <= kDegenerateStd * std::max(1.0, std::abs(model.means[j])) ? 1.0 : s;
    }

    // Normal equations over [1, z_1 .. z_d].
    const std::size_t p = d + 1;
    std::vector<double> ata(p * p, 0.0);
    std::vector<double> atb(p, 0.0);
    std::vector<double> row(p);
    for (const auto& ex : examples) {
        row[0] = 1.0;
        for (std::size_t j = 0; j < d; ++j) row[j + 1] = (ex.features[j] - model.means[j]) / model.stds[j];
        for (std::size_t r = 0; r < p; ++r) {
            atb[r] += row[r] * ex.grade;
            for (std::size_t c = 0; c <= r; ++c) ata[r * p + c] += row[r] * row[c];
        }
    }
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = r + 1; c < p; ++c) ata[r * p + c] = ata[c * p + r];
    for (std::size_t j = 1; j < p; ++j) ata[j * p + j] += ridge_lambda;

    model.coefficients = cholesky_solve(std::move(ata), std::move(atb), p);
    return model;
}

std::vector<double> feature_vector(const CandidateFeatures& f) { return {f.R, f.C, f.I, f.D}; }
std::vector<double> feature_vector(const SessionMetrics& m) { return {m.T_a, m.P_s, m.P_e}; }

CandidateModel fit_candidate_model(std::span<const TrainingExample> examples) {
    for (const auto& ex : examples)
        if (ex.features.size() != CandidateModel::kDimension)
            throw invalid_argument("candidate examples need 4 features (R, C, I, D)");
    return {fit_linear(examples)};
}

TargetModel fit_target_model(std::span<const TrainingExample> examples) {
    for (const auto& ex : examples)
        if (ex.features.size() != TargetModel::kDimension)
            throw invalid_argument("target examples need 3 features (T_a, P_s, P_e)");
    return {fit_linear(examples)};
}

double predict_candidate(const CandidateModel& model, const CandidateFeatures& f) {
    return model.linear.predict(feature_vector(f));
}

double predict_target(const TargetModel& model, const SessionMetrics& m) {
    return model.linear.predict(feature_vector(m));
}

std::string model_to_json(const LinearModel& model, ModelKind kind) {
    if (!model.fitted()) throw conflict("cannot save an unfitted model");
    json j{{"schema_version", kModelSchemaVersion},
           {"kind", std::string(kind_name(kind))},
           {"coefficients", model.coefficients},
           {"means", model.means},
           {"stds", model.stds}};
    return j.dump(2);
}

LinearModel model_from_json(std::string_view text, ModelKind expected_kind) {
    const json j = detail::parse_json(text, "model file");
    const int version = detail::get_as<int>(j, "schema_version");
    if (version != kModelSchemaVersion)
        throw schema_error("unsupported model schema_version " + std::to_string(version));
    const auto kind = detail::get_as<std::string>(j, "kind");
    if (kind != kind_name(expected_kind))
        throw schema_error("expected a " + std::string(kind_name(expected_kind)) + " model, found '" + kind + "'");

    LinearModel m;
    m.coefficients = detail::get_as<std::vector<double>>(j, "coefficients");
    m.means = detail::get_as<std::vector<double>>(j, "means");
    m.stds = detail::get_as<std::vector<double>>(j, "stds");
    const std::size_t d = kind_dimension(expected_kind);
    if (m.means.size() != d || m.stds.size() != d || m.coefficients.size() != d + 1)
        throw schema_error("model dimension mismatch: a " + kind + " model has " + std::to_string(d) +
                           " features and " + std::to_string(d + 1) + " coefficients");
    for (double s : m.stds)
        if (!(s > 0.0) || !std::isfinite(s)) throw schema_error("model stds must be positive");
    return m;
}

void save_model(const CandidateModel& model, const std::string& path) {
    write_whole_file(path, model_to_json(model.linear, ModelKind::candidate));
}

void save_model(const TargetModel& model, const std::string& path) {
    write_whole_file(path, model_to_json(model.linear, ModelKind::target));
}

CandidateModel load_candidate_model(const std::string& path) {
    return {model_from_json(read_whole_file(path), ModelKind::candidate)};
}

TargetModel load_target_model(const std::string& path) {
    return {model_from_json(read_whole_file(path), ModelKind::target)};
}

std::vector<TrainingExample> read_training_examples(std::istream& in) {
    std::vector<TrainingExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = detail::parse_json(line, "training example");
            out.push_back({detail::get_as<std::vector<double>>(j, "features"), detail::get_as<double>(j, "grade")});
        } catch (const Error& e) {
            throw Error(e.kind(), "example line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_training_examples(std::ostream& out, std::span<const TrainingExample> examples) {
    for (const auto& ex : examples) out << json{{"features", ex.features}, {"grade", ex.grade}}.dump() << '\n';
}

}  // namespace refind
