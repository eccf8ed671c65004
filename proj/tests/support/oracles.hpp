#pragma once

// Reference implementations used only by tests. They share no code with the
// library and favour obviousness over speed.

#include <string>
#include <vector>

#include "refind/familiarity_model.hpp"
#include "refind/nnign_ranker.hpp"

namespace refind::oracle {

/// Solves A x = b by Gaussian elimination with partial pivoting in long
/// double. Throws std::runtime_error on a singular matrix.
std::vector<long double> gaussian_solve(std::vector<std::vector<long double>> a, std::vector<long double> b);

struct OracleFit {
    std::vector<double> coefficients;  // intercept first, slopes on z-scored features
    std::vector<double> means;
    std::vector<double> stds;
};

/// Builds X = [1, z(x)] explicitly and solves (X^T X + lambda J) w = X^T y,
/// J the identity with a zero in the intercept slot.
OracleFit normal_equations_fit(const std::vector<TrainingExample>& examples, double lambda);

/// Tries every permutation of the candidates and returns the unique one that
/// is non-decreasing in (|F_i - F_t|, doc_id). Intended for n <= 8.
std::vector<std::string> exhaustive_order(const std::vector<ScoredCandidate>& candidates, double F_t);

}  // namespace refind::oracle
