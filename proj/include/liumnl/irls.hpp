#pragma once

#include <limits>

#include "liumnl/linalg.hpp"
#include "liumnl/model.hpp"

namespace liumnl {

/// Raised when IRLS coefficients blow past kDivergenceBound, the signature
/// of (quasi-)separated data.
struct SeparationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDivergenceBound = 1e8;

struct IrlsOptions {
  int max_iter = 100;
  double tol = 1e-6;
};

struct MleFit {
  CoefficientSet coeffs;
  std::vector<Matrix> weighted_crossprods; // C_j = X' W_j X at the solution
  int iterations = 0;
  bool converged = false;
  double final_delta = std::numeric_limits<double>::infinity();
};

/// Maximum likelihood fit by per-category iteratively re-weighted least
/// squares.
///
/// Starting from all-zero coefficients, each pass updates every
/// non-reference category as b_j += (X' W_j X)^{-1} X' (y_j - pi_j), with
/// probabilities and weights recomputed jointly at the top of the pass
/// (the categories couple through the shared softmax denominator).
/// Stops when the largest absolute coefficient change in a pass drops
/// below tol.
inline MleFit fit_mle(const Dataset& data, const IrlsOptions& opts = {}) {
  require(opts.tol > 0.0, "fit_mle: tolerance must be positive");
  require(opts.max_iter >= 1, "fit_mle: max_iter must be at least 1");

  const Matrix& x = data.x();
  const std::size_t q = x.cols();
  const std::size_t k = data.n_levels() - 1;

  MleFit fit;
  fit.coeffs.betas.assign(k, Vector(q, 0.0));
  fit.coeffs.category_order = data.category_order();

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const Matrix pi = softmax_probabilities(x, fit.coeffs);
    const std::vector<Vector> grads = score(x, data.codes(), pi);

    double max_delta = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const Vector w = weight_vector(pi, j);
      const Matrix c = weighted_crossprod(x, w);
      Vector step;
      try {
        step = solve_spd(c, grads[j]);
      } catch (const SingularMatrixError&) {
        throw SingularMatrixError(
            "fit_mle: singular weighted cross-product for category '" +
            fit.coeffs.category_order[j] + "' (multicollinearity failure)");
      }
      for (std::size_t c2 = 0; c2 < q; ++c2) {
        fit.coeffs.betas[j][c2] += step[c2];
        max_delta = std::max(max_delta, std::abs(step[c2]));
      }
      if (max_abs(fit.coeffs.betas[j]) > kDivergenceBound)
        throw SeparationError("fit_mle: coefficients diverged (separation failure)");
    }

    fit.iterations = iter;
    fit.final_delta = max_delta;
    if (max_delta < opts.tol) {
      fit.converged = true;
      break;
    }
  }

  // Weights and cross-products reported at the solution.
  const Matrix pi = softmax_probabilities(x, fit.coeffs);
  fit.weighted_crossprods.reserve(k);
  for (std::size_t j = 0; j < k; ++j)
    fit.weighted_crossprods.push_back(weighted_crossprod(x, weight_vector(pi, j)));
  return fit;
}

/// Per-category asymptotic covariance (X' W_j X)^{-1}. The reported standard
/// errors are the square roots of its diagonal.
inline std::vector<Matrix> mle_covariance(const MleFit& fit) {
  require(fit.converged, "mle_covariance: fit did not converge");
  std::vector<Matrix> out;
  out.reserve(fit.weighted_crossprods.size());
  for (const Matrix& c : fit.weighted_crossprods) out.push_back(inverse_spd(c));
  return out;
}

/// Scalar mean squared error of the MLE: sum_i 1/lambda_i over the spectrum
/// of X' W_j X.
inline double mle_scalar_mse(const Vector& eigenvalues) {
  double s = 0.0;
  for (double l : eigenvalues) {
    if (l <= 0.0) throw std::domain_error("mle_scalar_mse: non-positive eigenvalue");
    s += 1.0 / l;
  }
  return s;
}

}  // namespace liumnl
