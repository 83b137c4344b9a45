#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "liumnl/matrix.hpp"

namespace liumnl {

/// Raised when a supposedly positive-definite solve meets a non-positive
/// pivot. In this library that always means the weighted cross-product is
/// numerically singular, i.e. a multicollinearity failure.
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenDecomposition {
  Vector eigenvalues;  // sorted descending
  Matrix eigenvectors; // column k pairs with eigenvalues[k]
};

inline void require_square(const Matrix& s, const char* who) {
  require(s.rows() == s.cols() && s.rows() >= 1, std::string(who) + ": matrix must be square and non-empty");
}

/// Symmetry check: max |S_ij - S_ji| must not exceed rel_tol * max |S_ij|.
inline void require_symmetric(const Matrix& s, double rel_tol = 1e-10) {
  require_square(s, "require_symmetric");
  require(all_finite(s), "require_symmetric: non-finite entries");
  double scale = 0.0;
  for (double v : s.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > rel_tol * std::max(scale, 1e-300))
        throw std::invalid_argument("matrix is not symmetric");
}

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline double diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i) * a(i, i);
  return std::sqrt(s);
}

}  // namespace detail

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// 1e-12 times the diagonal norm, capped at 100 sweeps. Eigenvalues come
/// back sorted descending (stable order on ties); each eigenvector column is
/// sign-normalized so its largest-magnitude component is non-negative.
inline EigenDecomposition symmetric_eigen(const Matrix& s) {
  require_symmetric(s);
  const std::size_t q = s.rows();
  Matrix a = s;
  Matrix v = Matrix::identity(q);

  constexpr int kMaxSweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = detail::off_diagonal_norm(a);
    if (off == 0.0 || off <= 1e-12 * detail::diagonal_norm(a)) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < q; ++p) {
      for (std::size_t r = p + 1; r < q; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        // Rotation angle from the stable one-sided formula.
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        const double app = a(p, p), arr = a(r, r);
        a(p, p) = app - t * apr;
        a(r, r) = arr + t * apr;
        a(p, r) = 0.0;
        a(r, p) = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
          if (k == p || k == r) continue;
          const double akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - sn * akr;
          a(p, k) = a(k, p);
          a(k, r) = sn * akp + c * akr;
          a(r, k) = a(k, r);
        }
        for (std::size_t k = 0; k < q; ++k) {
          const double vkp = v(k, p), vkr = v(k, r);
          v(k, p) = c * vkp - sn * vkr;
          v(k, r) = sn * vkp + c * vkr;
        }
      }
    }
  }
  if (!converged) {
    const double off = detail::off_diagonal_norm(a);
    if (off != 0.0 && off > 1e-12 * detail::diagonal_norm(a))
      throw std::runtime_error("symmetric_eigen: Jacobi sweeps did not converge within 100 sweeps");
  }

  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(q);
  out.eigenvectors = Matrix(q, q);
  for (std::size_t k = 0; k < q; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    std::size_t imax = 0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      const double av = std::abs(v(i, src));
      if (av > vmax) {
        vmax = av;
        imax = i;
      }
    }
    const double flip = v(imax, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < q; ++i) out.eigenvectors(i, k) = flip * v(i, src);
  }
  return out;
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// A pivot at or below 1e-12 times the largest diagonal entry counts as
/// numerically singular.
inline Matrix cholesky_factor(const Matrix& a) {
  require_symmetric(a);
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double pivot_tol = 1e-12 * max_diag;

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= pivot_tol)
      throw SingularMatrixError("cholesky_factor: non-positive pivot at column " + std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

/// Solve A X = B for symmetric positive definite A via Cholesky.
inline Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "solve_spd: right-hand side rows disagree");
  const Matrix l = cholesky_factor(a);
  const std::size_t n = a.rows(), m = b.cols();
  Matrix x = b;
  // forward: L y = b
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    // backward: L' x = y
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, c);
      x(ii, c) = s / l(ii, ii);
    }
  }
  return x;
}

inline Vector solve_spd(const Matrix& a, const Vector& b) {
  require(a.rows() == b.size(), "solve_spd: right-hand side length disagrees");
  Matrix rhs(b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  const Matrix x = solve_spd(a, rhs);
  Vector out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = x(i, 0);
  return out;
}

inline Matrix inverse_spd(const Matrix& a) {
  return solve_spd(a, Matrix::identity(a.rows()));
}

/// sqrt(lambda_max / lambda_min) of a symmetric matrix with a strictly
/// positive spectrum. Values above 30 flag strong multicollinearity.
inline double condition_number(const Matrix& s) {
  const EigenDecomposition eig = symmetric_eigen(s);
  const double lmax = eig.eigenvalues.front();
  const double lmin = eig.eigenvalues.back();
  if (lmin <= 0.0)
    throw std::domain_error("condition_number: non-positive smallest eigenvalue");
  return std::sqrt(lmax / lmin);
}

}  // namespace liumnl
