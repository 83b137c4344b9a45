#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <thread>

#include "liumnl/liu.hpp"
#include "liumnl/rng.hpp"

namespace liumnl {

enum class Estimator { mle, d1, d2, d3 };

inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::mle: return "mle";
    case Estimator::d1: return "d1";
    case Estimator::d2: return "d2";
    default: return "d3";
  }
}

enum class CoefficientMode { equal, principal_eigenvector };

/// How the common component enters the correlated design. `independent`
/// draws p+1 standard normals per row and shares the extra one, giving every
/// pair of columns correlation rho^2. `shared_last` reuses the p-th draw as
/// the common component, which leaves the last column proportional to it.
enum class DesignScheme { independent, shared_last };

inline constexpr std::uint64_t kDefaultMasterSeed = 1729;

struct SimulationGrid {
  std::vector<double> rhos{0.9, 0.99, 0.999};
  std::vector<int> ps{4, 8, 12, 20};
  std::vector<int> ns{100, 200, 500, 1000};
  int m = 3;
  std::vector<Estimator> estimators{Estimator::mle, Estimator::d1, Estimator::d2, Estimator::d3};
  int replications = 2000;
  std::uint64_t master_seed = kDefaultMasterSeed;
  CoefficientMode coefficient_mode = CoefficientMode::principal_eigenvector;
  DesignScheme design_scheme = DesignScheme::independent;
  double tol = 1e-6;
  int max_iter = 100;

  void validate() const {
    for (double rho : rhos)
      require(rho >= 0.0 && rho < 1.0, "simulation grid: every rho must lie in [0, 1)");
    require(!rhos.empty() && !ps.empty() && !ns.empty(), "simulation grid: empty factor list");
    for (int p : ps) {
      require(p >= 1, "simulation grid: p must be positive");
      for (int n : ns)
        require(n > p + 5, "simulation grid: every n must exceed p + 5");
    }
    require(replications >= 1, "simulation grid: replications must be at least 1");
    require(m >= 2, "simulation grid: m must be at least 2");
    require(!estimators.empty(), "simulation grid: no estimators requested");
    require(tol > 0.0, "simulation grid: tol must be positive");
    require(max_iter >= 1, "simulation grid: max_iter must be at least 1");
  }
};

struct Cell {
  double rho;
  int p;
  int n;
};

struct CellResult {
  Cell cell{};
  std::vector<Estimator> estimators;
  Vector mse;  // parallel to estimators
  int failed_replications = 0;
  std::uint64_t master_seed = 0;
  std::size_t cell_index = 0;
};

/// Correlated design matrix of Eq-style construction: with s = sqrt(1-rho^2),
/// column i is s z_i + rho z_shared, so each pair of columns has population
/// correlation rho^2 (scheme `independent`; `shared_last` reuses z_{p-1} as
/// the shared draw). Fully determined by the seed; normals are drawn
/// row-major.
inline Matrix generate_design(int n, int p, double rho, std::uint64_t seed,
                              DesignScheme scheme = DesignScheme::independent) {
  require(rho >= 0.0 && rho < 1.0, "generate_design: rho must lie in [0, 1)");
  require(n >= 1 && p >= 1, "generate_design: n and p must be positive");
  SplitMix64 rng(seed);
  const double s = std::sqrt(1.0 - rho * rho);
  Matrix x(n, p);
  if (scheme == DesignScheme::independent) {
    for (int l = 0; l < n; ++l) {
      Vector z(p + 1);
      for (int i = 0; i <= p; ++i) z[i] = rng.next_normal();
      for (int i = 0; i < p; ++i) x(l, i) = s * z[i] + rho * z[p];
    }
  } else {
    for (int l = 0; l < n; ++l) {
      Vector z(p);
      for (int i = 0; i < p; ++i) z[i] = rng.next_normal();
      for (int i = 0; i < p; ++i) x(l, i) = s * z[i] + rho * z[p - 1];
    }
  }
  return x;
}

/// Unit-norm true coefficients, identical for every non-reference category.
/// `equal` sets each entry to 1/sqrt(p); `principal_eigenvector` takes the
/// eigenvector of X'X belonging to its largest eigenvalue.
inline CoefficientSet make_coefficients(int p, int m, CoefficientMode mode,
                                        const Matrix* x = nullptr) {
  require(p >= 1, "make_coefficients: p must be positive");
  require(m >= 2, "make_coefficients: m must be at least 2");
  Vector beta(p);
  if (mode == CoefficientMode::equal) {
    const double v = 1.0 / std::sqrt(static_cast<double>(p));
    for (double& b : beta) b = v;
  } else {
    require(x != nullptr, "make_coefficients: principal_eigenvector mode needs the design matrix");
    const Matrix gram = transpose(*x) * (*x);
    const EigenDecomposition eig = symmetric_eigen(gram);
    for (int i = 0; i < p; ++i) beta[i] = eig.eigenvectors(i, 0);
    const double nrm = norm2(beta);
    for (double& b : beta) b /= nrm;
  }
  CoefficientSet coeffs;
  for (int j = 1; j < m; ++j) {
    coeffs.betas.push_back(beta);
    coeffs.category_order.push_back(std::to_string(j));
  }
  return coeffs;
}

/// Multinomial responses sampled by inverse CDF: one uniform deviate per
/// observation walked against the cumulative row probabilities. Returns
/// category codes with the reference coded m-1.
inline std::vector<int> generate_responses(const Matrix& x, const CoefficientSet& coeffs,
                                           std::uint64_t seed) {
  const Matrix pi = softmax_probabilities(x, coeffs);
  const std::size_t m = pi.cols();
  SplitMix64 rng(seed);
  std::vector<int> codes(x.rows());
  for (std::size_t l = 0; l < x.rows(); ++l) {
    const double u = rng.next_uniform();
    double cum = 0.0;
    int code = static_cast<int>(m) - 1;
    for (std::size_t j = 0; j < m; ++j) {
      cum += pi(l, j);
      if (u < cum) {
        code = static_cast<int>(j);
        break;
      }
    }
    codes[l] = code;
  }
  return codes;
}

namespace detail {

inline std::vector<std::string> simulation_levels(int m) {
  std::vector<std::string> levels;
  for (int j = 1; j <= m; ++j) levels.push_back(std::to_string(j));
  return levels;
}

}  // namespace detail

/// One Monte Carlo cell: R replications of generate/fit/shrink, squared
/// errors accumulated per estimator and averaged over the replications that
/// produced a fit. Replications where the fit fails (singular cross-product,
/// separation, or a generated response missing a level) are excluded from
/// every estimator's average symmetrically and counted in
/// failed_replications.
inline CellResult run_cell(const Cell& cell, std::size_t cell_index, const SimulationGrid& grid) {
  CellResult result;
  result.cell = cell;
  result.estimators = grid.estimators;
  result.mse.assign(grid.estimators.size(), 0.0);
  result.master_seed = grid.master_seed;
  result.cell_index = cell_index;

  const std::vector<std::string> levels = detail::simulation_levels(grid.m);
  const IrlsOptions opts{grid.max_iter, grid.tol};
  int successes = 0;

  for (int r = 1; r <= grid.replications; ++r) {
    const std::uint64_t rep_seed = stable_mix(grid.master_seed, cell_index, static_cast<std::uint64_t>(r));
    const std::uint64_t design_seed = stable_mix(rep_seed, 1, 0);
    const std::uint64_t response_seed = stable_mix(rep_seed, 2, 0);

    MleFit fit;
    CoefficientSet truth;
    try {
      Matrix x = generate_design(cell.n, cell.p, cell.rho, design_seed, grid.design_scheme);
      truth = make_coefficients(cell.p, grid.m, grid.coefficient_mode, &x);
      std::vector<int> codes = generate_responses(x, truth, response_seed);
      Dataset data = Dataset::from_indices(std::move(x), std::move(codes), levels);
      fit = fit_mle(data, opts);
    } catch (const SingularMatrixError&) {
      ++result.failed_replications;
      continue;
    } catch (const SeparationError&) {
      ++result.failed_replications;
      continue;
    } catch (const DataError&) {
      ++result.failed_replications;
      continue;
    }
    ++successes;

    // Spectral summaries are shared by all three selection rules.
    std::vector<std::optional<SpectralSummary>> spectra(fit.coeffs.betas.size());
    for (std::size_t e = 0; e < grid.estimators.size(); ++e) {
      const Estimator est = grid.estimators[e];
      double sq = 0.0;
      for (std::size_t j = 0; j < fit.coeffs.betas.size(); ++j) {
        const Vector& b_true = truth.betas[j];
        Vector b_hat;
        if (est == Estimator::mle) {
          b_hat = fit.coeffs.betas[j];
        } else {
          if (!spectra[j])
            spectra[j] = spectral_summary(fit.weighted_crossprods[j], fit.coeffs.betas[j]);
          const DRule rule = est == Estimator::d1   ? DRule::d1
                             : est == Estimator::d2 ? DRule::d2
                                                    : DRule::d3;
          const double d = select_d(*spectra[j], rule);
          b_hat = liu_estimate(fit.coeffs.betas[j], fit.weighted_crossprods[j], d);
        }
        for (std::size_t c = 0; c < b_hat.size(); ++c) {
          const double diff = b_hat[c] - b_true[c];
          sq += diff * diff;
        }
      }
      result.mse[e] += sq;
    }
  }

  if (successes == 0)
    throw std::runtime_error("run_cell: every replication failed");
  for (double& v : result.mse) v /= static_cast<double>(successes);
  return result;
}

/// Cells in deterministic cartesian order: rho-major, then p, then n.
inline std::vector<Cell> grid_cells(const SimulationGrid& grid) {
  std::vector<Cell> cells;
  cells.reserve(grid.rhos.size() * grid.ps.size() * grid.ns.size());
  for (double rho : grid.rhos)
    for (int p : grid.ps)
      for (int n : grid.ns) cells.push_back({rho, p, n});
  return cells;
}

/// Run every cell of the grid. Cells execute on up to `workers` threads;
/// every number is derived from (master_seed, cell_index), so the output is
/// identical for any worker count.
inline std::vector<CellResult> run_grid(const SimulationGrid& grid, int workers = 1) {
  grid.validate();
  require(workers >= 1, "run_grid: workers must be at least 1");
  const std::vector<Cell> cells = grid_cells(grid);
  std::vector<CellResult> results(cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_cell(cells[i], i, grid);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) {
          first_error = "cell (rho=" + std::to_string(cells[i].rho) +
                        ", p=" + std::to_string(cells[i].p) +
                        ", n=" + std::to_string(cells[i].n) + "): " + e.what();
        }
      }
    }
  };

  const std::size_t thread_count = std::min<std::size_t>(workers, cells.size());
  if (thread_count <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error("run_grid: " + first_error);
  return results;
}

}  // namespace liumnl
