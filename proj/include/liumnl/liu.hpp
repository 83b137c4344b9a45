#pragma once

#include <algorithm>
#include <string>

#include "liumnl/irls.hpp"

namespace liumnl {

/// Selection rules for the Liu biasing parameter d: the mean, median or
/// minimum of the per-component stationary points, floored at 0 and capped
/// at 1.
enum class DRule { d1, d2, d3 };

inline const char* to_string(DRule rule) {
  switch (rule) {
    case DRule::d1: return "d1";
    case DRule::d2: return "d2";
    default: return "d3";
  }
}

/// Eigen-structure of a weighted cross-product together with the rotated
/// coefficients alpha = T' b.
struct SpectralSummary {
  Vector eigenvalues;
  Matrix rotation;  // columns are eigenvectors of C
  Vector alpha;
};

inline SpectralSummary spectral_summary(const Matrix& c, const Vector& beta_mle) {
  require(c.rows() == beta_mle.size(), "spectral_summary: dimensions disagree");
  SpectralSummary s;
  EigenDecomposition eig = symmetric_eigen(c);
  s.eigenvalues = std::move(eig.eigenvalues);
  s.rotation = std::move(eig.eigenvectors);
  s.alpha = transpose(s.rotation) * beta_mle;
  return s;
}

/// The Liu-shrunken coefficient vector (C + I)^{-1} (C + d I) b.
/// d = 1 reproduces b exactly; smaller d shrinks harder.
inline Vector liu_estimate(const Vector& beta_mle, const Matrix& c, double d) {
  require(c.rows() == beta_mle.size(), "liu_estimate: dimensions disagree");
  require(d >= 0.0 && d <= 1.0, "liu_estimate: d must lie in [0, 1]");
  const Vector rhs = add_scaled_identity(c, d) * beta_mle;
  return solve_spd(add_scaled_identity(c, 1.0), rhs);
}

struct LiuMoments {
  Matrix covariance;
  Vector bias;
  Matrix mmse;  // covariance + bias bias'
};

/// Asymptotic covariance, bias and matrix MSE of the Liu estimator at a
/// given d. `beta` is the coefficient vector the bias is taken against; in
/// reports the MLE plugs in for the unknown truth.
inline LiuMoments liu_moments(const Matrix& c, double d, const Vector& beta) {
  require(c.rows() == beta.size(), "liu_moments: dimensions disagree");
  require(d >= 0.0 && d <= 1.0, "liu_moments: d must lie in [0, 1]");
  const Matrix c_plus_i = add_scaled_identity(c, 1.0);
  const Matrix c_plus_d = add_scaled_identity(c, d);

  // cov = (C+I)^{-1}(C+dI) C^{-1} (C+dI)(C+I)^{-1}, as two SPD solves.
  const Matrix a = solve_spd(c_plus_i, c_plus_d);   // (C+I)^{-1}(C+dI)
  const Matrix g = solve_spd(c, transpose(a));      // C^{-1}(C+dI)(C+I)^{-1}
  LiuMoments m;
  m.covariance = a * g;
  // Symmetrize away the last-bit asymmetry of the two-solve route.
  for (std::size_t i = 0; i < m.covariance.rows(); ++i)
    for (std::size_t j = i + 1; j < m.covariance.cols(); ++j) {
      const double v = 0.5 * (m.covariance(i, j) + m.covariance(j, i));
      m.covariance(i, j) = v;
      m.covariance(j, i) = v;
    }

  m.bias = solve_spd(c_plus_i, beta);
  for (double& v : m.bias) v *= -(1.0 - d);

  m.mmse = m.covariance;
  for (std::size_t i = 0; i < m.mmse.rows(); ++i)
    for (std::size_t j = 0; j < m.mmse.cols(); ++j) m.mmse(i, j) += m.bias[i] * m.bias[j];
  return m;
}

/// Scalar MSE of the Liu estimator in the eigenbasis:
/// sum_i (l_i + d)^2 / (l_i (l_i + 1)^2) + (1-d)^2 sum_i a_i^2 / (l_i + 1)^2.
inline double liu_scalar_mse(const Vector& lambda, const Vector& alpha, double d) {
  require(lambda.size() == alpha.size(), "liu_scalar_mse: lengths disagree");
  double var_term = 0.0, bias_term = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double l = lambda[i];
    if (l <= 0.0) throw std::domain_error("liu_scalar_mse: non-positive eigenvalue");
    const double lp1 = l + 1.0;
    var_term += (l + d) * (l + d) / (l * lp1 * lp1);
    bias_term += alpha[i] * alpha[i] / (lp1 * lp1);
  }
  return var_term + (1.0 - d) * (1.0 - d) * bias_term;
}

/// d-derivative of liu_scalar_mse:
/// sum_i 2 (l_i + d) / (l_i (l_i + 1)^2) - 2 (1-d) sum_i a_i^2 / (l_i + 1)^2.
inline double mse_gradient(const Vector& lambda, const Vector& alpha, double d) {
  require(lambda.size() == alpha.size(), "mse_gradient: lengths disagree");
  double var_term = 0.0, bias_term = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double l = lambda[i];
    if (l <= 0.0) throw std::domain_error("mse_gradient: non-positive eigenvalue");
    const double lp1 = l + 1.0;
    var_term += 2.0 * (l + d) / (l * lp1 * lp1);
    bias_term += alpha[i] * alpha[i] / (lp1 * lp1);
  }
  return var_term - 2.0 * (1.0 - d) * bias_term;
}

/// Stationary point of the single-component scalar MSE:
/// l (a^2 - 1) / (1 + l a^2). May be negative; selection rules clip it.
inline double d_individual(double lambda_i, double alpha_sq_i) {
  if (lambda_i <= 0.0) throw std::domain_error("d_individual: non-positive eigenvalue");
  if (alpha_sq_i < 0.0) throw std::domain_error("d_individual: negative squared alpha");
  return lambda_i * (alpha_sq_i - 1.0) / (1.0 + lambda_i * alpha_sq_i);
}

/// Data-driven biasing parameter: d1 = mean, d2 = median, d3 = minimum of
/// the per-component d_i, floored at 0 and capped at 1. An even-length
/// median is the midpoint of the two central order statistics.
inline double select_d(const SpectralSummary& summary, DRule rule) {
  require(!summary.eigenvalues.empty(), "select_d: empty spectrum");
  const std::size_t q = summary.eigenvalues.size();
  Vector ds(q);
  for (std::size_t i = 0; i < q; ++i)
    ds[i] = d_individual(summary.eigenvalues[i], summary.alpha[i] * summary.alpha[i]);

  double value = 0.0;
  switch (rule) {
    case DRule::d1: {
      for (double v : ds) value += v;
      value /= static_cast<double>(q);
      break;
    }
    case DRule::d2: {
      std::sort(ds.begin(), ds.end());
      value = (q % 2 == 1) ? ds[q / 2] : 0.5 * (ds[q / 2 - 1] + ds[q / 2]);
      break;
    }
    case DRule::d3: {
      value = *std::min_element(ds.begin(), ds.end());
      break;
    }
  }
  return std::clamp(value, 0.0, 1.0);
}

/// A fitted Liu estimator for every non-reference category, with the
/// plug-in moments used for reporting.
struct LiuFit {
  CoefficientSet coeffs;
  Vector d_values;            // one d per category
  std::string rule;           // "d1", "d2", "d3" or "fixed"
  std::vector<Matrix> covariance;
  std::vector<Vector> bias;
  std::vector<Matrix> mmse;
  Vector scalar_mse;          // per category, computed in the eigenbasis
};

namespace detail {

inline LiuFit liu_fit_with_ds(const MleFit& mle, Vector d_values, std::string rule) {
  LiuFit fit;
  fit.coeffs.category_order = mle.coeffs.category_order;
  fit.rule = std::move(rule);
  fit.d_values = std::move(d_values);
  const std::size_t k = mle.coeffs.betas.size();
  for (std::size_t j = 0; j < k; ++j) {
    const Matrix& c = mle.weighted_crossprods[j];
    const Vector& b = mle.coeffs.betas[j];
    const double d = fit.d_values[j];
    fit.coeffs.betas.push_back(liu_estimate(b, c, d));
    LiuMoments m = liu_moments(c, d, b);
    fit.covariance.push_back(std::move(m.covariance));
    fit.bias.push_back(std::move(m.bias));
    fit.mmse.push_back(std::move(m.mmse));
    const SpectralSummary s = spectral_summary(c, b);
    fit.scalar_mse.push_back(liu_scalar_mse(s.eigenvalues, s.alpha, d));
  }
  return fit;
}

}  // namespace detail

/// Fit the Liu estimator with a selection rule applied per category.
inline LiuFit fit_liu(const MleFit& mle, DRule rule) {
  Vector ds;
  ds.reserve(mle.coeffs.betas.size());
  for (std::size_t j = 0; j < mle.coeffs.betas.size(); ++j) {
    const SpectralSummary s = spectral_summary(mle.weighted_crossprods[j], mle.coeffs.betas[j]);
    ds.push_back(select_d(s, rule));
  }
  return detail::liu_fit_with_ds(mle, std::move(ds), to_string(rule));
}

/// Fit the Liu estimator with one fixed d shared by every category.
inline LiuFit fit_liu_fixed(const MleFit& mle, double d) {
  require(d >= 0.0 && d <= 1.0, "fit_liu_fixed: d must lie in [0, 1]");
  return detail::liu_fit_with_ds(mle, Vector(mle.coeffs.betas.size(), d), "fixed");
}

}  // namespace liumnl
