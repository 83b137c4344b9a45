#include <iostream>

#include <CLI11.hpp>

#include "liumnl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multinomial logistic regression with the Liu shrinkage estimator"};
  app.require_subcommand(1);

  liumnl::FitOptions fit_opts;
  CLI::App* fit = app.add_subcommand("fit", "Fit a model from a CSV file");
  fit->add_option("--input", fit_opts.input, "input CSV with a header row")->required();
  fit->add_option("--response", fit_opts.response, "name of the response column")->required();
  fit->add_option("--reference", fit_opts.reference,
                  "reference level ('last' = lexicographically last)");
  fit->add_option("--estimator", fit_opts.estimator, "mle or liu");
  fit->add_option("--d-rule", fit_opts.d_rule, "d1, d2, d3 or fixed:<v>");
  fit->add_flag("--intercept", fit_opts.intercept, "append an intercept column of ones");
  fit->add_option("--tol", fit_opts.tol, "IRLS convergence tolerance");
  fit->add_option("--max-iter", fit_opts.max_iter, "IRLS iteration cap");
  fit->add_option("--output", fit_opts.output, "path for the JSON report")->required();

  liumnl::SimulateOptions sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "Run the Monte Carlo MSE study");
  sim->add_option("--config", sim_opts.config_path, "JSON grid configuration")->required();
  sim->add_option("--out", sim_opts.out_csv, "output CSV path")->required();
  sim->add_option("--workers", sim_opts.workers, "worker threads for independent cells");
  sim->add_option("--charts", sim_opts.charts_dir, "directory for SVG charts (one per p)");

  liumnl::DiagnoseOptions diag_opts;
  CLI::App* diag = app.add_subcommand("diagnose", "Multicollinearity diagnostics");
  diag->add_option("--input", diag_opts.input, "input CSV with a header row")->required();
  diag->add_option("--response", diag_opts.response,
                   "response column; when given, also reports per-category diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return liumnl::kExitUsage;
  }

  if (fit->parsed()) return liumnl::cmd_fit(fit_opts, std::cout, std::cerr);
  if (sim->parsed()) return liumnl::cmd_simulate(sim_opts, std::cout, std::cerr);
  return liumnl::cmd_diagnose(diag_opts, std::cout, std::cerr);
}
