// Acceptance suite: one pass/fail line per criterion, exit code equal to the
// number of failed criteria. Heavier than the unit tests (the two simulation
// criteria re-run the Monte Carlo study); expect a few minutes.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "liumnl/cli.hpp"
#include "oracle_helpers.hpp"

using namespace liumnl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what) {
  std::printf("%s: criterion %d — %s\n", ok ? "PASS" : "FAIL", criterion, what.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

int hardware_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 2 : static_cast<int>(hc);
}

// Reference MSE values of the published study at p = 4: the simulated MLE
// MSE per (rho, n) cell.
struct TableCell {
  double rho;
  int n;
  double mle_mse;
};
const std::vector<TableCell> kReferenceMle = {
    {0.9, 100, 7.6023},    {0.9, 200, 2.7658},    {0.9, 500, 1.5937},   {0.9, 1000, 1.1544},
    {0.99, 100, 65.2970},  {0.99, 200, 20.7964},  {0.99, 500, 8.8854},  {0.99, 1000, 4.9233},
    {0.999, 100, 621.8735}, {0.999, 200, 218.5666}, {0.999, 500, 85.5395}, {0.999, 1000, 44.3507}};

// The reproduction grid: m = 3, unit-norm principal-eigenvector
// coefficients, the shared-last design (the literal reading of the published
// design recipe, which matches the published high-correlation cells far
// better than the p+1-column variant), fixed master seed.
SimulationGrid reproduction_grid() {
  SimulationGrid grid;
  grid.ps = {4};
  grid.m = 3;
  grid.replications = 2000;
  grid.master_seed = 1729;
  grid.coefficient_mode = CoefficientMode::principal_eigenvector;
  grid.design_scheme = DesignScheme::shared_last;
  return grid;
}

double mse_of(const CellResult& r, Estimator est) {
  for (std::size_t e = 0; e < r.estimators.size(); ++e)
    if (r.estimators[e] == est) return r.mse[e];
  return -1.0;
}

void criterion_1_table1() {
  const SimulationGrid grid = reproduction_grid();
  const std::vector<CellResult> results = run_grid(grid, hardware_workers());

  bool all_within = true;
  bool d3_lowest = true;
  std::string detail;
  for (const CellResult& r : results) {
    double expected = -1.0;
    for (const TableCell& t : kReferenceMle)
      if (t.rho == r.cell.rho && t.n == r.cell.n) expected = t.mle_mse;
    const double mle = mse_of(r, Estimator::mle);
    const double rel = mle / expected - 1.0;
    const bool within = std::abs(rel) <= 0.25;
    all_within = all_within && within;

    bool lowest = true;
    if (r.cell.rho >= 0.99) {
      const double d3 = mse_of(r, Estimator::d3);
      for (Estimator est : {Estimator::mle, Estimator::d1, Estimator::d2})
        lowest = lowest && d3 < mse_of(r, est);
      d3_lowest = d3_lowest && lowest;
    }
    std::printf(
        "    cell rho=%-6g n=%-5d mle=%10.4f reference=%10.4f rel=%+6.1f%% %s  d1=%10.4f d2=%10.4f "
        "d3=%10.4f%s\n",
        r.cell.rho, r.cell.n, mle, expected, 100.0 * rel, within ? "ok " : "OUT",
        mse_of(r, Estimator::d1), mse_of(r, Estimator::d2), mse_of(r, Estimator::d3),
        (r.cell.rho >= 0.99 && !lowest) ? "  (d3 not lowest)" : "");
  }
  report(1, all_within && d3_lowest,
         "reference-grid reproduction at p=4, m=3, R=2000 (MLE within ±25% in all 12 cells; "
         "d3 lowest for rho >= 0.99)");
}

void criterion_2_trends() {
  SimulationGrid grid = reproduction_grid();
  grid.ps = {4, 8, 12, 20};
  grid.replications = 500;
  grid.estimators = {Estimator::mle};
  const std::vector<CellResult> results = run_grid(grid, hardware_workers());

  auto mle_at = [&](double rho, int p, int n) {
    for (const CellResult& r : results)
      if (r.cell.rho == rho && r.cell.p == p && r.cell.n == n) return mse_of(r, Estimator::mle);
    return -1.0;
  };

  bool rho_up = true, n_down = true, p_up = true;
  for (int p : grid.ps)
    for (int n : grid.ns) {
      if (!(mle_at(0.9, p, n) < mle_at(0.99, p, n) && mle_at(0.99, p, n) < mle_at(0.999, p, n)))
        rho_up = false;
    }
  for (double rho : grid.rhos)
    for (int p : grid.ps) {
      double prev = mle_at(rho, p, 100);
      for (int n : {200, 500, 1000}) {
        if (!(mle_at(rho, p, n) < prev)) n_down = false;
        prev = mle_at(rho, p, n);
      }
    }
  for (double rho : grid.rhos) {
    double prev = mle_at(rho, 4, 100);
    for (int p : {8, 12, 20}) {
      if (!(mle_at(rho, p, 100) > prev)) p_up = false;
      prev = mle_at(rho, p, 100);
    }
  }
  std::printf("    rho-monotonicity: %s, n-monotonicity: %s, p-monotonicity (n=100): %s\n",
              rho_up ? "yes" : "no", n_down ? "yes" : "no", p_up ? "yes" : "no");
  report(2, rho_up && n_down && p_up,
         "qualitative trends at R=500: MSE(MLE) rises with rho, falls with n, rises with p");
}

// Fifty random fitted models shared by criteria 3 and 9.
std::vector<MleFit> fitted_corpus() {
  std::vector<MleFit> fits;
  std::uint64_t seed = 9000;
  while (fits.size() < 50) {
    ++seed;
    const int n = 80 + static_cast<int>(seed % 5) * 30;
    const int p = 2 + static_cast<int>(seed % 4);
    const int m = 2 + static_cast<int>(seed % 3);
    const double rho = 0.1 + 0.08 * static_cast<double>(seed % 10);
    try {
      const auto gen = oracle::make_dataset(n, p, m, rho, seed);
      MleFit fit = fit_mle(gen.data);
      if (fit.converged) fits.push_back(std::move(fit));
    } catch (const std::exception&) {
      // skip pathological draws; the corpus only needs converged fits
    }
  }
  return fits;
}

void criterion_3_endpoint(const std::vector<MleFit>& corpus) {
  bool ok = true;
  for (const MleFit& fit : corpus) {
    for (std::size_t j = 0; j < fit.coeffs.betas.size(); ++j) {
      const Matrix& c = fit.weighted_crossprods[j];
      const Vector& b = fit.coeffs.betas[j];
      const Vector at_one = liu_estimate(b, c, 1.0);
      for (std::size_t i = 0; i < b.size(); ++i)
        ok = ok && std::abs(at_one[i] - b[i]) <= 1e-12;
      const LiuMoments m = liu_moments(c, 1.0, b);
      for (double v : m.bias) ok = ok && v == 0.0;
      const SpectralSummary s = spectral_summary(c, b);
      ok = ok && std::abs(liu_scalar_mse(s.eigenvalues, s.alpha, 1.0) -
                          mle_scalar_mse(s.eigenvalues)) <= 1e-12 * mle_scalar_mse(s.eigenvalues);
    }
  }
  report(3, ok, "d = 1 endpoint on 50 fitted models: Liu == MLE, zero bias, scalar MSE collapse");
}

void criterion_4_gradient() {
  SplitMix64 rng(424242);
  bool ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t q = 1 + rep % 8;
    Vector lambda(q), alpha(q);
    for (std::size_t i = 0; i < q; ++i) {
      lambda[i] = std::pow(10.0, 6.0 * rng.next_uniform() - 3.0);  // [1e-3, 1e3]
      alpha[i] = 6.0 * rng.next_uniform() - 3.0;
    }
    const double d = rng.next_uniform();
    const double g = mse_gradient(lambda, alpha, d);
    const double fd = oracle::central_difference(
        [&](double dd) { return liu_scalar_mse(lambda, alpha, dd); }, d, 1e-6);
    const double scale = std::max({std::abs(g), std::abs(fd), 1.0});
    if (std::abs(g - fd) > 1e-5 * scale) {
      ok = false;
      std::printf("    gradient mismatch at rep %d: analytic %.12g vs fd %.12g\n", rep, g, fd);
    }
  }
  report(4, ok, "mse_gradient matches central finite differences on 100 random (lambda, alpha, d)");
}

void criterion_5_argmin() {
  SplitMix64 rng(515151);
  bool ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const double lambda = std::pow(10.0, 3.3 * rng.next_uniform() - 2.0);  // [1e-2, 20]
    const double alpha_sq = 0.2 + 4.8 * rng.next_uniform();
    const Vector lv{lambda}, av{std::sqrt(alpha_sq)};

    double best_d = -5.0, best = 1e300;
    for (int i = 0; i <= 100000; ++i) {
      const double d = -5.0 + 10.0 * i / 100000.0;
      const double v = liu_scalar_mse(lv, av, d);
      if (v < best) {
        best = v;
        best_d = d;
      }
    }
    const double closed = d_individual(lambda, alpha_sq);
    if (std::abs(closed - best_d) > 1e-4) {
      ok = false;
      std::printf("    argmin mismatch: closed-form %.8f vs grid %.8f (lambda=%g alpha^2=%g)\n",
                  closed, best_d, lambda, alpha_sq);
    }
  }
  report(5, ok, "d_individual equals the dense-grid argmin of the scalar MSE (100 random pairs)");
}

void criterion_6_mle_crosscheck() {
  bool ok = true;
  int done = 0;
  std::uint64_t seed = 33000;
  while (done < 20) {
    ++seed;
    const int p = 2 + static_cast<int>(seed % 3);
    const auto gen = oracle::make_dataset(200, p, 3, 0.3, seed);
    MleFit fit;
    try {
      fit = fit_mle(gen.data);
    } catch (const std::exception&) {
      continue;
    }
    if (!fit.converged) continue;
    ++done;

    const auto ref = oracle::maximize_loglik(gen.data.x(), gen.data.codes(), 3);
    for (std::size_t j = 0; j < fit.coeffs.betas.size(); ++j)
      for (std::size_t c = 0; c < fit.coeffs.betas[j].size(); ++c)
        if (std::abs(fit.coeffs.betas[j][c] - ref[j][c]) > 1e-4) {
          ok = false;
          std::printf("    coefficient mismatch (seed %llu): irls %.8f vs bfgs %.8f\n",
                      static_cast<unsigned long long>(seed), fit.coeffs.betas[j][c], ref[j][c]);
        }

    const Matrix pi = softmax_probabilities(gen.data.x(), fit.coeffs);
    for (const Vector& g : score(gen.data.x(), gen.data.codes(), pi))
      if (max_abs(g) >= 1e-4) ok = false;
  }
  report(6, ok,
         "IRLS equals an independent BFGS likelihood maximizer within 1e-4 on 20 datasets; "
         "score below 1e-4");
}

void criterion_7_linalg() {
  SplitMix64 rng(717171);
  bool ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t q = 1 + rep % 20;
    const Matrix s = oracle::random_symmetric(q, rng);
    const EigenDecomposition eig = symmetric_eigen(s);
    Matrix lam(q, q);
    for (std::size_t i = 0; i < q; ++i) lam(i, i) = eig.eigenvalues[i];
    const Matrix recon = eig.eigenvectors * lam * transpose(eig.eigenvectors);
    if (frobenius_norm(recon - s) > 1e-9 * std::max(frobenius_norm(s), 1e-30)) ok = false;
    double lam_sum = 0.0;
    for (double l : eig.eigenvalues) lam_sum += l;
    if (std::abs(lam_sum - trace(s)) > 1e-9 * std::max(1.0, std::abs(trace(s)))) ok = false;
  }

  const auto [r, names] = load_numeric_csv("data/leaf_texture_correlation.csv");
  const double cn = condition_number(r);
  constexpr double kOracleCN = 278.59299431898679;  // numpy/mpmath, frozen
  if (std::abs(cn / kOracleCN - 1.0) > 1e-6 || cn <= 30.0) {
    ok = false;
    std::printf("    fixture condition number %.12f vs oracle %.12f\n", cn, kOracleCN);
  }
  report(7, ok,
         "eigendecomposition reconstruction/trace below 1e-9 on 100 matrices; fixture CN matches "
         "the frozen oracle and exceeds 30");
}

void criterion_8_determinism() {
  const char* bin = std::getenv("LIU_MNL_BIN");
  const std::string binary = bin ? bin : "./liu-mnl";
  const fs::path dir = fs::temp_directory_path() / "liumnl_acceptance";
  fs::create_directories(dir);
  const fs::path cfg = dir / "determinism.json";
  std::ofstream(cfg) << R"({"rhos":[0.9,0.99],"ps":[3],"ns":[60,120],)"
                     << R"("replications":50,"m":3,"master_seed":555})";
  const fs::path out1 = dir / "w1.csv";
  const fs::path out8 = dir / "w8.csv";

  const std::string cmd1 = binary + " simulate --config " + cfg.string() + " --out " +
                           out1.string() + " --workers 1 > /dev/null";
  const std::string cmd8 = binary + " simulate --config " + cfg.string() + " --out " +
                           out8.string() + " --workers 8 > /dev/null";
  const int rc1 = std::system(cmd1.c_str());
  const int rc8 = std::system(cmd8.c_str());

  bool ok = rc1 == 0 && rc8 == 0;
  if (ok) {
    std::ifstream a(out1, std::ios::binary), b(out8, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    ok = !sa.str().empty() && sa.str() == sb.str();
  }
  report(8, ok, "cmd_simulate output is byte-identical at 1 and 8 workers (fixed seed)");
}

void criterion_9_dominance(const std::vector<MleFit>& corpus) {
  bool ok = true;
  for (const MleFit& fit : corpus) {
    for (std::size_t j = 0; j < fit.coeffs.betas.size(); ++j) {
      const SpectralSummary s = spectral_summary(fit.weighted_crossprods[j], fit.coeffs.betas[j]);
      const double mse_mle = mle_scalar_mse(s.eigenvalues);
      bool beaten = false;
      for (int i = 1; i < 1000 && !beaten; ++i)
        beaten = liu_scalar_mse(s.eigenvalues, s.alpha, i / 1000.0) < mse_mle;
      ok = ok && beaten;
    }
  }
  report(9, ok,
         "for every fitted model a 1000-point d grid contains liu_scalar_mse < mle_scalar_mse");
}

}  // namespace

int main() {
  std::printf("acceptance suite (simulation criteria take a few minutes)\n");

  const std::vector<MleFit> corpus = fitted_corpus();
  criterion_3_endpoint(corpus);
  criterion_4_gradient();
  criterion_5_argmin();
  criterion_6_mle_crosscheck();
  criterion_7_linalg();
  criterion_9_dominance(corpus);
  criterion_8_determinism();
  criterion_1_table1();
  criterion_2_trends();

  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
