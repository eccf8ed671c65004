#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace refind::oracle {

std::vector<long double> gaussian_solve(std::vector<std::vector<long double>> a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0L) throw std::runtime_error("singular system");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const long double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

OracleFit normal_equations_fit(const std::vector<TrainingExample>& examples, double lambda) {
    const std::size_t n = examples.size();
    const std::size_t d = examples.front().features.size();
    OracleFit fit;
    for (std::size_t j = 0; j < d; ++j) {
        long double sum = 0.0L;
        for (const auto& ex : examples) sum += ex.features[j];
        const long double mean = sum / n;
        long double ss = 0.0L;
        for (const auto& ex : examples) ss += (ex.features[j] - mean) * (ex.features[j] - mean);
        long double sd = std::sqrt(ss / n);
        if (sd <= 1e-12L * std::max(1.0L, std::fabs(mean))) sd = 1.0L;
        fit.means.push_back(static_cast<double>(mean));
        fit.stds.push_back(static_cast<double>(sd));
    }

    std::vector<std::vector<long double>> x(n, std::vector<long double>(d + 1, 1.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            x[i][j + 1] = (static_cast<long double>(examples[i].features[j]) - fit.means[j]) / fit.stds[j];

    std::vector<std::vector<long double>> xtx(d + 1, std::vector<long double>(d + 1, 0.0L));
    std::vector<long double> xty(d + 1, 0.0L);
    for (std::size_t r = 0; r <= d; ++r) {
        for (std::size_t c = 0; c <= d; ++c)
            for (std::size_t i = 0; i < n; ++i) xtx[r][c] += x[i][r] * x[i][c];
        for (std::size_t i = 0; i < n; ++i) xty[r] += x[i][r] * examples[i].grade;
        if (r > 0) xtx[r][r] += lambda;
    }
    for (long double w : gaussian_solve(xtx, xty)) fit.coefficients.push_back(static_cast<double>(w));
    return fit;
}

std::vector<std::string> exhaustive_order(const std::vector<ScoredCandidate>& candidates, double F_t) {
    std::vector<std::size_t> perm(candidates.size());
    std::iota(perm.begin(), perm.end(), 0);
    auto key_less_or_equal = [&](std::size_t a, std::size_t b) {
        const double da = std::fabs(candidates[a].F_i - F_t);
        const double db = std::fabs(candidates[b].F_i - F_t);
        if (da != db) return da < db;
        return candidates[a].doc_id <= candidates[b].doc_id;
    };
    do {
        bool sorted = true;
        for (std::size_t i = 1; i < perm.size() && sorted; ++i) sorted = key_less_or_equal(perm[i - 1], perm[i]);
        if (sorted) {
            std::vector<std::string> out;
            for (std::size_t i : perm) out.push_back(candidates[i].doc_id);
            return out;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    throw std::runtime_error("no sorted permutation found");
}

}  // namespace refind::oracle
