#include <catch2/catch_amalgamated.hpp>

#include "liumnl/csv.hpp"
#include "liumnl/simulation.hpp"

using namespace liumnl;

TEST_CASE("generate_design: rho = 0 returns the raw normal draws") {
  const Matrix x = generate_design(5, 3, 0.0, 77);
  SplitMix64 rng(77);
  for (int l = 0; l < 5; ++l) {
    Vector z(4);
    for (double& v : z) v = rng.next_normal();
    for (int i = 0; i < 3; ++i) REQUIRE(x(l, i) == z[i]);  // exact
  }
}

TEST_CASE("generate_design: deterministic for a fixed seed") {
  const Matrix a = generate_design(20, 4, 0.99, 123);
  const Matrix b = generate_design(20, 4, 0.99, 123);
  REQUIRE(a == b);
  const Matrix c = generate_design(20, 4, 0.99, 124);
  REQUIRE_FALSE(a == c);
}

TEST_CASE("generate_design: pairwise correlation approaches rho^2") {
  const double rho = 0.99;
  const Matrix x = generate_design(5000, 4, rho, 2024);
  const Matrix corr = correlation_matrix(x);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b)
      REQUIRE(corr(a, b) == Catch::Approx(rho * rho).margin(0.02));
}

TEST_CASE("generate_design: shared_last scheme ties the last column to the shared draw") {
  const double rho = 0.9;
  const Matrix x = generate_design(2000, 3, rho, 55, DesignScheme::shared_last);
  const Matrix corr = correlation_matrix(x);
  // among the first p-1 columns the correlation is rho^2; with the last, rho
  REQUIRE(corr(0, 1) == Catch::Approx(rho * rho).margin(0.03));
  REQUIRE(corr(0, 2) == Catch::Approx(rho).margin(0.03));
  REQUIRE_THROWS_AS(generate_design(10, 2, 1.0, 1), std::invalid_argument);
}

TEST_CASE("make_coefficients: unit norm in both modes") {
  const CoefficientSet eq = make_coefficients(4, 3, CoefficientMode::equal);
  REQUIRE(eq.betas.size() == 2);
  for (const Vector& b : eq.betas) {
    for (double v : b) REQUIRE(v == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(norm2(b) == Catch::Approx(1.0).margin(1e-12));
  }

  const Matrix x = generate_design(200, 5, 0.7, 99);
  const CoefficientSet pe = make_coefficients(5, 4, CoefficientMode::principal_eigenvector, &x);
  REQUIRE(pe.betas.size() == 3);
  for (const Vector& b : pe.betas) REQUIRE(norm2(b) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(pe.betas[0] == pe.betas[1]);

  REQUIRE_THROWS_AS(make_coefficients(5, 4, CoefficientMode::principal_eigenvector, nullptr),
                    std::invalid_argument);
}

TEST_CASE("make_coefficients: principal eigenvector maximizes the quadratic form") {
  const Matrix x = generate_design(150, 4, 0.5, 101);
  const Matrix gram = transpose(x) * x;
  const Vector beta = make_coefficients(4, 3, CoefficientMode::principal_eigenvector, &x).betas[0];
  const double best = dot(beta, gram * beta);
  SplitMix64 rng(777);
  for (int rep = 0; rep < 10000; ++rep) {
    Vector v(4);
    for (double& c : v) c = rng.next_normal();
    const double nrm = norm2(v);
    for (double& c : v) c /= nrm;
    REQUIRE(dot(v, gram * v) <= best * (1.0 + 1e-12));
  }
}

TEST_CASE("generate_responses: degenerate, frequency and determinism checks") {
  // a huge coefficient forces category 1 whenever x > 0
  Matrix x(6, 1, 1.0);
  CoefficientSet c;
  c.betas = {Vector{60.0}};
  c.category_order = {"1"};
  const std::vector<int> forced = generate_responses(x, c, 5);
  for (int v : forced) REQUIRE(v == 0);

  // zero coefficients: uniform categories within 3 binomial standard errors
  const int n = 10000, m = 3;
  Matrix xr(n, 2, 0.5);
  CoefficientSet cz;
  cz.betas = {Vector(2, 0.0), Vector(2, 0.0)};
  cz.category_order = {"1", "2"};
  const std::vector<int> y = generate_responses(xr, cz, 6);
  std::vector<int> counts(m, 0);
  for (int v : y) ++counts[v];
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n);
  for (int j = 0; j < m; ++j)
    REQUIRE(counts[j] / double(n) == Catch::Approx(1.0 / 3.0).margin(3 * se));

  REQUIRE(generate_responses(xr, cz, 6) == y);
  REQUIRE_FALSE(generate_responses(xr, cz, 7) == y);
}

TEST_CASE("run_cell: R = 1 equals a hand-rolled single replication") {
  SimulationGrid grid;
  grid.rhos = {0.5};
  grid.ps = {3};
  grid.ns = {80};
  grid.replications = 1;
  grid.master_seed = 4242;

  const CellResult r = run_cell({0.5, 3, 80}, 0, grid);
  REQUIRE(r.failed_replications == 0);
  REQUIRE(r.estimators.size() == 4);

  const std::uint64_t rep_seed = stable_mix(4242, 0, 1);
  Matrix x = generate_design(80, 3, 0.5, stable_mix(rep_seed, 1, 0));
  const CoefficientSet truth =
      make_coefficients(3, 3, CoefficientMode::principal_eigenvector, &x);
  std::vector<int> codes = generate_responses(x, truth, stable_mix(rep_seed, 2, 0));
  const Dataset data = Dataset::from_indices(std::move(x), std::move(codes), {"1", "2", "3"});
  const MleFit fit = fit_mle(data, IrlsOptions{grid.max_iter, grid.tol});

  double sq = 0.0;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t c = 0; c < 3; ++c) {
      const double diff = fit.coeffs.betas[j][c] - truth.betas[j][c];
      sq += diff * diff;
    }
  REQUIRE(r.mse[0] == sq);  // exact: a single replication is just the sum

  REQUIRE(r.master_seed == 4242);
  REQUIRE(r.cell_index == 0);
}

TEST_CASE("grid_cells: cartesian order, rho-major") {
  SimulationGrid grid;  // study defaults: 3 rhos x 4 ps x 4 ns
  const std::vector<Cell> cells = grid_cells(grid);
  REQUIRE(cells.size() == 48);
  REQUIRE(cells[0].rho == 0.9);
  REQUIRE(cells[0].p == 4);
  REQUIRE(cells[0].n == 100);
  REQUIRE(cells[1].n == 200);
  REQUIRE(cells[4].p == 8);
  REQUIRE(cells[16].rho == 0.99);
}

TEST_CASE("run_grid: worker count does not change a single bit") {
  SimulationGrid grid;
  grid.rhos = {0.6, 0.9};
  grid.ps = {3};
  grid.ns = {60, 90};
  grid.replications = 25;
  grid.master_seed = 31337;

  const auto seq = run_grid(grid, 1);
  const auto par = run_grid(grid, 4);
  REQUIRE(seq.size() == 4);
  REQUIRE(par.size() == 4);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    REQUIRE(seq[i].mse == par[i].mse);  // exact, element-wise
    REQUIRE(seq[i].failed_replications == par[i].failed_replications);
  }
}

TEST_CASE("run_cell: d3 dominates the MLE under strong collinearity") {
  SimulationGrid grid;
  grid.rhos = {0.99};
  grid.ps = {4};
  grid.ns = {100};
  grid.replications = 500;
  grid.master_seed = 271828;
  grid.design_scheme = DesignScheme::shared_last;

  const CellResult r = run_cell({0.99, 4, 100}, 0, grid);
  double mse_mle = -1.0, mse_d3 = -1.0;
  for (std::size_t e = 0; e < r.estimators.size(); ++e) {
    if (r.estimators[e] == Estimator::mle) mse_mle = r.mse[e];
    if (r.estimators[e] == Estimator::d3) mse_d3 = r.mse[e];
  }
  REQUIRE(mse_d3 < mse_mle);
}

TEST_CASE("simulation grid: invariants rejected with a clear message") {
  SimulationGrid grid;
  grid.rhos = {1.0};
  REQUIRE_THROWS_AS(grid.validate(), std::invalid_argument);
  grid.rhos = {0.9};
  grid.ns = {8};
  REQUIRE_THROWS_AS(grid.validate(), std::invalid_argument);
  grid.ns = {100};
  grid.replications = 0;
  REQUIRE_THROWS_AS(grid.validate(), std::invalid_argument);
}
