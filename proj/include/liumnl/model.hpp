#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "liumnl/matrix.hpp"

namespace liumnl {

/// Raised when input data violates a model invariant (too few rows, unknown
/// reference level, empty category, non-finite covariates, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before taking
// logs, and IRLS weights are floored at kWeightFloor. Both bounds sit far
// below any statistical signal; they exist so quasi-separated fits keep
// producing finite numbers instead of singular weight matrices.
inline constexpr double kProbClamp = 1e-12;
inline constexpr double kWeightFloor = 1e-10;

/// Coefficients of the non-reference categories; the reference category's
/// vector is implicitly zero.
struct CoefficientSet {
  std::vector<Vector> betas;               // one per non-reference category
  std::vector<std::string> category_order; // level names matching betas

  std::size_t n_categories() const { return betas.size(); }
};

/// A design matrix paired with an encoded categorical response.
///
/// Levels are stored with the reference level last, so response code m-1 is
/// always the reference. Construction validates every invariant the fitting
/// code relies on.
class Dataset {
 public:
  /// Build from string labels. `reference` must be one of the observed
  /// levels; labels are compared after trimming surrounding whitespace.
  static Dataset from_labels(Matrix x, const std::vector<std::string>& labels,
                             const std::string& reference);

  /// Build from pre-encoded responses. `levels` fixes the category order,
  /// reference last; every code must reference a level and every level must
  /// occur.
  static Dataset from_indices(Matrix x, std::vector<int> codes,
                              std::vector<std::string> levels);

  const Matrix& x() const { return x_; }
  const std::vector<int>& codes() const { return codes_; }
  const std::vector<std::string>& levels() const { return levels_; }

  std::size_t n() const { return x_.rows(); }
  std::size_t n_columns() const { return x_.cols(); }
  std::size_t n_levels() const { return levels_.size(); }
  const std::string& reference() const { return levels_.back(); }

  /// Non-reference level names in category order.
  std::vector<std::string> category_order() const {
    return {levels_.begin(), levels_.end() - 1};
  }

 private:
  Dataset(Matrix x, std::vector<int> codes, std::vector<std::string> levels)
      : x_(std::move(x)), codes_(std::move(codes)), levels_(std::move(levels)) {}

  void validate() const;

  Matrix x_;
  std::vector<int> codes_;          // per row: index into levels_
  std::vector<std::string> levels_; // reference last
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void Dataset::validate() const {
  if (codes_.size() != x_.rows()) throw DataError("dataset: response length disagrees with rows");
  if (levels_.size() < 2) throw DataError("dataset: need at least 2 levels");
  if (x_.rows() <= x_.cols()) throw DataError("dataset: need more observations than covariates");
  if (!all_finite(x_)) throw DataError("dataset: covariate matrix has non-finite entries");
  std::vector<int> counts(levels_.size(), 0);
  for (int c : codes_) {
    if (c < 0 || static_cast<std::size_t>(c) >= levels_.size())
      throw DataError("dataset: response code out of range");
    ++counts[c];
  }
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] == 0)
      throw DataError("dataset: level '" + levels_[j] + "' never occurs");
  std::set<std::string> distinct(levels_.begin(), levels_.end());
  if (distinct.size() != levels_.size()) throw DataError("dataset: duplicate level names");
}

inline Dataset Dataset::from_indices(Matrix x, std::vector<int> codes,
                                     std::vector<std::string> levels) {
  Dataset d(std::move(x), std::move(codes), std::move(levels));
  d.validate();
  return d;
}

inline Dataset Dataset::from_labels(Matrix x, const std::vector<std::string>& labels,
                                    const std::string& reference) {
  std::vector<std::string> trimmed(labels.size());
  std::set<std::string> distinct;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    trimmed[i] = trim(labels[i]);
    distinct.insert(trimmed[i]);
  }
  const std::string ref = trim(reference);
  if (!distinct.count(ref))
    throw DataError("dataset: reference level '" + ref + "' not observed in the response");
  std::vector<std::string> levels(distinct.begin(), distinct.end()); // lexicographic
  levels.erase(std::find(levels.begin(), levels.end(), ref));
  levels.push_back(ref);
  std::vector<int> codes(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::find(levels.begin(), levels.end(), trimmed[i]);
    codes[i] = static_cast<int>(it - levels.begin());
  }
  return from_indices(std::move(x), std::move(codes), std::move(levels));
}

/// Row-wise softmax of a matrix of linear predictors. The row maximum is
/// subtracted before exponentiation, so arbitrarily large predictors stay
/// finite.
inline Matrix softmax_rows(const Matrix& eta) {
  require(all_finite(eta), "softmax: non-finite linear predictor");
  Matrix pi(eta.rows(), eta.cols());
  for (std::size_t i = 0; i < eta.rows(); ++i) {
    double mx = eta(i, 0);
    for (std::size_t j = 1; j < eta.cols(); ++j) mx = std::max(mx, eta(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < eta.cols(); ++j) {
      pi(i, j) = std::exp(eta(i, j) - mx);
      denom += pi(i, j);
    }
    for (std::size_t j = 0; j < eta.cols(); ++j) pi(i, j) /= denom;
  }
  return pi;
}

/// Category probabilities of the multinomial logit model: column j of the
/// result is exp(x_i b_j) normalized over all categories, with the reference
/// category (last column) contributing exp(0).
inline Matrix softmax_probabilities(const Matrix& x, const CoefficientSet& coeffs) {
  require(!coeffs.betas.empty(), "softmax_probabilities: empty coefficient set");
  for (const Vector& b : coeffs.betas) {
    require(b.size() == x.cols(), "softmax_probabilities: coefficient length disagrees with columns");
    require(all_finite(b), "softmax_probabilities: non-finite coefficients");
  }
  require(all_finite(x), "softmax_probabilities: non-finite covariates");
  const std::size_t k = coeffs.betas.size();
  Matrix eta(x.rows(), k + 1); // last column stays zero for the reference
  for (std::size_t j = 0; j < k; ++j) {
    const Vector& b = coeffs.betas[j];
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) s += x(i, c) * b[c];
      eta(i, j) = s;
    }
  }
  return softmax_rows(eta);
}

/// sum_i sum_j 1{y_i = j} log(pi_ij), with probabilities clamped before the
/// logarithm. Never positive.
inline double log_likelihood(const Matrix& pi, const std::vector<int>& codes) {
  require(pi.rows() == codes.size(), "log_likelihood: row counts disagree");
  double ll = 0.0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    require(codes[i] >= 0 && static_cast<std::size_t>(codes[i]) < pi.cols(),
            "log_likelihood: response code out of range");
    const double p = std::clamp(pi(i, codes[i]), kProbClamp, 1.0 - kProbClamp);
    ll += std::log(p);
  }
  return ll;
}

/// Score of the log-likelihood: for each non-reference category j, the
/// vector sum_i (1{y_i = j} - pi_ij) x_i.
inline std::vector<Vector> score(const Matrix& x, const std::vector<int>& codes,
                                 const Matrix& pi) {
  require(pi.rows() == x.rows() && pi.rows() == codes.size(), "score: row counts disagree");
  require(pi.cols() >= 2, "score: need at least two categories");
  const std::size_t k = pi.cols() - 1;
  std::vector<Vector> grads(k, Vector(x.cols(), 0.0));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double resid = (static_cast<std::size_t>(codes[i]) == j ? 1.0 : 0.0) - pi(i, j);
      for (std::size_t c = 0; c < x.cols(); ++c) grads[j][c] += resid * x(i, c);
    }
  }
  return grads;
}

/// Diagonal of the per-category IRLS weight matrix: pi_ij (1 - pi_ij),
/// floored at kWeightFloor.
inline Vector weight_vector(const Matrix& pi, std::size_t j) {
  require(j < pi.cols(), "weight_vector: category index out of range");
  Vector w(pi.rows());
  for (std::size_t i = 0; i < pi.rows(); ++i)
    w[i] = std::max(pi(i, j) * (1.0 - pi(i, j)), kWeightFloor);
  return w;
}

}  // namespace liumnl
