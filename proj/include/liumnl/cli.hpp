#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "liumnl/csv.hpp"
#include "liumnl/report.hpp"
#include "liumnl/simulation.hpp"
#include "liumnl/svg.hpp"

namespace liumnl {

// Exit code contract shared by every subcommand:
//   0 success, 1 usage/input error, 2 fit non-convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

struct FitOptions {
  std::string input;
  std::string response;
  std::string reference = "last";
  std::string estimator = "liu";   // "mle" or "liu"
  std::string d_rule = "d3";       // "d1", "d2", "d3" or "fixed:<v>"
  bool intercept = false;
  double tol = 1e-6;
  int max_iter = 100;
  std::string output;
};

struct SimulateOptions {
  std::string config_path;
  std::string out_csv;
  std::string charts_dir;  // empty: no charts
  int workers = 1;
};

struct DiagnoseOptions {
  std::string input;
  std::string response;  // optional
};

namespace detail {

inline std::string fmt_shortest(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline EstimatorReport make_estimator_report(const std::string& name, double d,
                                             const Vector& coeffs, const Matrix* covariance,
                                             double scalar_mse) {
  EstimatorReport r;
  r.name = name;
  r.d = d;
  r.coefficients = coeffs;
  if (covariance) {
    r.standard_errors.resize(coeffs.size());
    for (std::size_t c = 0; c < coeffs.size(); ++c)
      r.standard_errors[c] = std::sqrt((*covariance)(c, c));
  }
  r.scalar_mse = scalar_mse;
  return r;
}

}  // namespace detail

/// Fit a model from a CSV file and emit a FitReport (JSON to `output`,
/// a readable table to `out`). Exit code 2 when IRLS hits max_iter; the
/// report is still written with converged=false.
inline int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err) {
  double fixed_d = -1.0;
  const bool use_fixed = opts.d_rule.rfind("fixed:", 0) == 0;
  if (use_fixed) {
    try {
      fixed_d = parse_double(opts.d_rule.substr(6), "--d-rule");
    } catch (const CsvError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    if (fixed_d < 0.0 || fixed_d > 1.0) {
      err << "error: --d-rule fixed:<v> needs v in [0, 1]\n";
      return kExitUsage;
    }
  } else if (opts.d_rule != "d1" && opts.d_rule != "d2" && opts.d_rule != "d3") {
    err << "error: --d-rule must be d1, d2, d3 or fixed:<v>\n";
    return kExitUsage;
  }
  if (opts.estimator != "mle" && opts.estimator != "liu") {
    err << "error: --estimator must be mle or liu\n";
    return kExitUsage;
  }

  MleFit fit;
  FitReport report;
  try {
    LoadedDataset loaded =
        load_dataset_csv(opts.input, opts.response, opts.reference, opts.intercept);
    report.covariates = loaded.covariate_names;
    report.reference = loaded.data.reference();
    fit = fit_mle(loaded.data, IrlsOptions{opts.max_iter, opts.tol});
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  report.input = opts.input;
  report.response = opts.response;
  report.intercept = opts.intercept;
  report.selected_estimator = opts.estimator;
  report.selected_d_rule = opts.d_rule;
  report.converged = fit.converged;
  report.iterations = fit.iterations;
  report.final_delta = fit.final_delta;
  report.tol = opts.tol;
  report.max_iter = opts.max_iter;
  report.moments_note =
      "Liu covariance/bias/MSE are plug-in values evaluated at the MLE coefficients";

  try {
    const std::size_t k = fit.coeffs.betas.size();
    std::vector<Matrix> mle_cov;
    if (fit.converged) mle_cov = mle_covariance(fit);

    std::vector<LiuFit> rule_fits;
    LiuFit fixed_fit;
    if (fit.converged) {
      rule_fits.push_back(fit_liu(fit, DRule::d1));
      rule_fits.push_back(fit_liu(fit, DRule::d2));
      rule_fits.push_back(fit_liu(fit, DRule::d3));
      if (use_fixed) fixed_fit = fit_liu_fixed(fit, fixed_d);
    }

    for (std::size_t j = 0; j < k; ++j) {
      CategoryReport cat;
      cat.level = fit.coeffs.category_order[j];
      cat.condition_number = condition_number(fit.weighted_crossprods[j]);
      const SpectralSummary spec = spectral_summary(fit.weighted_crossprods[j], fit.coeffs.betas[j]);
      cat.estimators.push_back(detail::make_estimator_report(
          "mle", 1.0, fit.coeffs.betas[j], fit.converged ? &mle_cov[j] : nullptr,
          mle_scalar_mse(spec.eigenvalues)));
      for (const LiuFit& lf : rule_fits)
        cat.estimators.push_back(detail::make_estimator_report(
            lf.rule, lf.d_values[j], lf.coeffs.betas[j], &lf.covariance[j], lf.scalar_mse[j]));
      if (fit.converged && use_fixed)
        cat.estimators.push_back(detail::make_estimator_report(
            "fixed", fixed_fit.d_values[j], fixed_fit.coeffs.betas[j], &fixed_fit.covariance[j],
            fixed_fit.scalar_mse[j]));
      report.categories.push_back(std::move(cat));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (!opts.output.empty()) {
    std::ofstream of(opts.output);
    if (!of) {
      err << "error: cannot write '" << opts.output << "'\n";
      return kExitUsage;
    }
    of << nlohmann::json(report).dump(2) << "\n";
  }
  print_fit_report(out, report);
  return fit.converged ? kExitOk : kExitNotConverged;
}

/// Parse a simulation grid from JSON. Missing fields take the study's
/// default values; bad fields are reported by name.
inline SimulationGrid parse_grid_config(const nlohmann::json& j) {
  SimulationGrid grid;
  auto fail = [](const std::string& field, const std::string& reason) {
    throw std::invalid_argument("config field '" + field + "': " + reason);
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    try {
      if (key == "rhos") grid.rhos = it->get<std::vector<double>>();
      else if (key == "ps") grid.ps = it->get<std::vector<int>>();
      else if (key == "ns") grid.ns = it->get<std::vector<int>>();
      else if (key == "m") grid.m = it->get<int>();
      else if (key == "replications") grid.replications = it->get<int>();
      else if (key == "master_seed") grid.master_seed = it->get<std::uint64_t>();
      else if (key == "tol") grid.tol = it->get<double>();
      else if (key == "max_iter") grid.max_iter = it->get<int>();
      else if (key == "coefficient_mode") {
        const std::string v = it->get<std::string>();
        if (v == "equal") grid.coefficient_mode = CoefficientMode::equal;
        else if (v == "principal_eigenvector") grid.coefficient_mode = CoefficientMode::principal_eigenvector;
        else fail(key, "expected 'equal' or 'principal_eigenvector', got '" + v + "'");
      } else if (key == "design_scheme") {
        const std::string v = it->get<std::string>();
        if (v == "independent") grid.design_scheme = DesignScheme::independent;
        else if (v == "shared_last") grid.design_scheme = DesignScheme::shared_last;
        else fail(key, "expected 'independent' or 'shared_last', got '" + v + "'");
      } else if (key == "estimators") {
        grid.estimators.clear();
        for (const std::string& name : it->get<std::vector<std::string>>()) {
          if (name == "mle") grid.estimators.push_back(Estimator::mle);
          else if (name == "d1") grid.estimators.push_back(Estimator::d1);
          else if (name == "d2") grid.estimators.push_back(Estimator::d2);
          else if (name == "d3") grid.estimators.push_back(Estimator::d3);
          else fail(key, "unknown estimator '" + name + "'");
        }
      } else {
        fail(key, "unknown field");
      }
    } catch (const nlohmann::json::exception& e) {
      fail(key, e.what());
    }
  }
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return grid;
}

inline std::string cell_results_to_csv(const std::vector<CellResult>& results, int replications) {
  std::string csv = "rho,p,n,estimator,mse,replications,failed,master_seed\n";
  for (const CellResult& r : results) {
    for (std::size_t e = 0; e < r.estimators.size(); ++e) {
      csv += detail::fmt_shortest(r.cell.rho);
      csv += ',' + std::to_string(r.cell.p);
      csv += ',' + std::to_string(r.cell.n);
      csv += ',' + std::string(to_string(r.estimators[e]));
      csv += ',' + detail::fmt_full(r.mse[e]);
      csv += ',' + std::to_string(replications);
      csv += ',' + std::to_string(r.failed_replications);
      csv += ',' + std::to_string(r.master_seed);
      csv += '\n';
    }
  }
  return csv;
}

/// Run the Monte Carlo study described by a JSON config and write one CSV
/// row per (cell, estimator). With a charts directory, also emits one SVG
/// per p of MSE against n, one line per (estimator, rho). Output is byte
/// identical for any worker count.
inline int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  SimulationGrid grid;
  try {
    std::ifstream in(opts.config_path);
    if (!in) throw std::invalid_argument("cannot open config '" + opts.config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config '" + opts.config_path + "' is not valid JSON: " + e.what());
    }
    grid = parse_grid_config(j);
    if (const char* env_seed = std::getenv("LIU_MNL_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env_seed, &end, 10);
      if (end == env_seed || *end != '\0')
        throw std::invalid_argument("LIU_MNL_SEED is not an unsigned integer: '" +
                                    std::string(env_seed) + "'");
      grid.master_seed = v;
    }
    if (opts.workers < 1) throw std::invalid_argument("--workers must be at least 1");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<CellResult> results;
  try {
    results = run_grid(grid, opts.workers);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::string csv = cell_results_to_csv(results, grid.replications);
  {
    std::ofstream of(opts.out_csv);
    if (!of) {
      err << "error: cannot write '" << opts.out_csv << "'\n";
      return kExitUsage;
    }
    of << csv;
  }

  if (!opts.charts_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opts.charts_dir, ec);
    if (ec) {
      err << "error: cannot create charts directory '" << opts.charts_dir << "'\n";
      return kExitUsage;
    }
    for (int p : grid.ps) {
      std::vector<ChartSeries> series;
      for (std::size_t e = 0; e < grid.estimators.size(); ++e) {
        for (double rho : grid.rhos) {
          ChartSeries s;
          s.label = std::string(to_string(grid.estimators[e])) +
                    " rho=" + detail::fmt_shortest(rho);
          for (const CellResult& r : results)
            if (r.cell.p == p && r.cell.rho == rho)
              s.points.push_back({static_cast<double>(r.cell.n), r.mse[e]});
          series.push_back(std::move(s));
        }
      }
      const std::string path = opts.charts_dir + "/mse_p" + std::to_string(p) + ".svg";
      std::ofstream of(path);
      if (!of) {
        err << "error: cannot write '" << path << "'\n";
        return kExitUsage;
      }
      of << render_line_chart_svg("Simulated MSE, p = " + std::to_string(p), "n",
                                  "MSE (log scale)", series);
    }
  }

  out << "wrote " << results.size() << " cells (" << csv.size() << " bytes) to " << opts.out_csv
      << "\n";
  return kExitOk;
}

/// Multicollinearity diagnostics: the covariate correlation matrix and its
/// condition number; with a response, also per-category eigenvalues and
/// condition numbers of the fitted X' W X matrices. CN in (10, 30] flags
/// moderate collinearity, above 30 strong.
inline int cmd_diagnose(const DiagnoseOptions& opts, std::ostream& out, std::ostream& err) {
  auto flag_of = [](double cn) {
    return cn > 30.0 ? " [strong multicollinearity]" : cn > 10.0 ? " [moderate multicollinearity]" : "";
  };
  bool converged = true;
  try {
    auto [x, names] = load_numeric_csv(opts.input, opts.response);
    const Matrix corr = correlation_matrix(x);

    out << "correlation matrix (" << x.rows() << " rows):\n";
    out << std::left << std::setw(12) << "";
    for (const std::string& n : names) out << std::right << std::setw(10) << n;
    out << "\n";
    for (std::size_t i = 0; i < corr.rows(); ++i) {
      out << std::left << std::setw(12) << names[i];
      for (std::size_t j = 0; j < corr.cols(); ++j)
        out << std::right << std::setw(10) << std::fixed << std::setprecision(4) << corr(i, j);
      out << "\n";
    }
    out << std::defaultfloat;
    const double cn = condition_number(corr);
    out << "condition number: " << std::fixed << std::setprecision(3) << cn << flag_of(cn)
        << std::defaultfloat << "\n";

    if (!opts.response.empty()) {
      LoadedDataset loaded = load_dataset_csv(opts.input, opts.response, "last", false);
      const MleFit fit = fit_mle(loaded.data);
      converged = fit.converged;
      if (!fit.converged)
        out << "warning: IRLS did not converge within " << fit.iterations << " iterations\n";
      for (std::size_t j = 0; j < fit.weighted_crossprods.size(); ++j) {
        const EigenDecomposition eig = symmetric_eigen(fit.weighted_crossprods[j]);
        out << "level '" << fit.coeffs.category_order[j] << "': eigenvalues of X'WX:";
        for (double l : eig.eigenvalues) out << " " << std::setprecision(6) << l;
        out << "\n";
        const double cnj = condition_number(fit.weighted_crossprods[j]);
        out << "level '" << fit.coeffs.category_order[j] << "': condition number CN"
            << (j + 1) << " = " << std::fixed << std::setprecision(3) << cnj << flag_of(cnj)
            << std::defaultfloat << "\n";
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return converged ? kExitOk : kExitNotConverged;
}

}  // namespace liumnl
