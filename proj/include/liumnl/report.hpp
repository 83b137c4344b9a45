#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "liumnl/liu.hpp"

namespace liumnl {

/// One estimator column of the per-category table: coefficients, standard
/// errors (square roots of the covariance diagonal, absent when the fit did
/// not converge) and the estimated scalar MSE.
struct EstimatorReport {
  std::string name;              // "mle", "d1", "d2", "d3", "fixed"
  double d = 1.0;                // biasing parameter; 1 for the MLE column
  Vector coefficients;
  Vector standard_errors;        // empty when unavailable
  double scalar_mse = 0.0;
};

struct CategoryReport {
  std::string level;
  double condition_number = 0.0; // of this category's X' W X
  std::vector<EstimatorReport> estimators;
};

struct FitReport {
  std::string input;
  std::string response;
  std::string reference;
  bool intercept = false;
  std::vector<std::string> covariates;
  std::string selected_estimator;  // "mle" or "liu"
  std::string selected_d_rule;     // "d1", "d2", "d3" or "fixed:<v>"
  bool converged = false;
  int iterations = 0;
  double final_delta = 0.0;
  double tol = 0.0;
  int max_iter = 0;
  std::string moments_note;        // plug-in metadata
  std::vector<CategoryReport> categories;
};

inline void to_json(nlohmann::json& j, const EstimatorReport& r) {
  j = nlohmann::json{{"name", r.name},
                     {"d", r.d},
                     {"coefficients", r.coefficients},
                     {"standard_errors", r.standard_errors},
                     {"scalar_mse", r.scalar_mse}};
}

inline void from_json(const nlohmann::json& j, EstimatorReport& r) {
  j.at("name").get_to(r.name);
  j.at("d").get_to(r.d);
  j.at("coefficients").get_to(r.coefficients);
  j.at("standard_errors").get_to(r.standard_errors);
  j.at("scalar_mse").get_to(r.scalar_mse);
}

inline void to_json(nlohmann::json& j, const CategoryReport& r) {
  j = nlohmann::json{{"level", r.level},
                     {"condition_number", r.condition_number},
                     {"estimators", r.estimators}};
}

inline void from_json(const nlohmann::json& j, CategoryReport& r) {
  j.at("level").get_to(r.level);
  j.at("condition_number").get_to(r.condition_number);
  j.at("estimators").get_to(r.estimators);
}

inline void to_json(nlohmann::json& j, const FitReport& r) {
  j = nlohmann::json{{"input", r.input},
                     {"response", r.response},
                     {"reference", r.reference},
                     {"intercept", r.intercept},
                     {"covariates", r.covariates},
                     {"selected_estimator", r.selected_estimator},
                     {"selected_d_rule", r.selected_d_rule},
                     {"converged", r.converged},
                     {"iterations", r.iterations},
                     {"final_delta", r.final_delta},
                     {"tol", r.tol},
                     {"max_iter", r.max_iter},
                     {"moments_note", r.moments_note},
                     {"categories", r.categories}};
}

inline void from_json(const nlohmann::json& j, FitReport& r) {
  j.at("input").get_to(r.input);
  j.at("response").get_to(r.response);
  j.at("reference").get_to(r.reference);
  j.at("intercept").get_to(r.intercept);
  j.at("covariates").get_to(r.covariates);
  j.at("selected_estimator").get_to(r.selected_estimator);
  j.at("selected_d_rule").get_to(r.selected_d_rule);
  j.at("converged").get_to(r.converged);
  j.at("iterations").get_to(r.iterations);
  j.at("final_delta").get_to(r.final_delta);
  j.at("tol").get_to(r.tol);
  j.at("max_iter").get_to(r.max_iter);
  j.at("moments_note").get_to(r.moments_note);
  j.at("categories").get_to(r.categories);
}

inline bool operator==(const EstimatorReport& a, const EstimatorReport& b) {
  return a.name == b.name && a.d == b.d && a.coefficients == b.coefficients &&
         a.standard_errors == b.standard_errors && a.scalar_mse == b.scalar_mse;
}

inline bool operator==(const CategoryReport& a, const CategoryReport& b) {
  return a.level == b.level && a.condition_number == b.condition_number &&
         a.estimators == b.estimators;
}

inline bool operator==(const FitReport& a, const FitReport& b) {
  return a.input == b.input && a.response == b.response && a.reference == b.reference &&
         a.intercept == b.intercept && a.covariates == b.covariates &&
         a.selected_estimator == b.selected_estimator && a.selected_d_rule == b.selected_d_rule &&
         a.converged == b.converged && a.iterations == b.iterations &&
         a.final_delta == b.final_delta && a.tol == b.tol && a.max_iter == b.max_iter &&
         a.moments_note == b.moments_note && a.categories == b.categories;
}

inline const EstimatorReport* find_estimator(const CategoryReport& cat, const std::string& name) {
  for (const EstimatorReport& e : cat.estimators)
    if (e.name == name) return &e;
  return nullptr;
}

/// Human-readable rendering: side-by-side estimator columns per level.
inline void print_fit_report(std::ostream& os, const FitReport& r) {
  os << "fit: " << r.input << "  response=" << r.response << "  reference=" << r.reference
     << "\n";
  os << (r.converged ? "converged" : "DID NOT CONVERGE") << " after " << r.iterations
     << " iterations (final max step " << std::scientific << std::setprecision(3)
     << r.final_delta << ", tol " << r.tol << ")\n"
     << std::defaultfloat;
  for (const CategoryReport& cat : r.categories) {
    os << "\nlevel: " << cat.level << "   condition number of X'WX: " << std::fixed
       << std::setprecision(3) << cat.condition_number << std::defaultfloat << "\n";
    os << std::left << std::setw(14) << "covariate";
    for (const EstimatorReport& e : cat.estimators) os << std::right << std::setw(22) << e.name;
    os << "\n";
    for (std::size_t c = 0; c < r.covariates.size(); ++c) {
      os << std::left << std::setw(14) << r.covariates[c];
      for (const EstimatorReport& e : cat.estimators) {
        std::ostringstream cellstr;
        cellstr << std::fixed << std::setprecision(4) << e.coefficients[c];
        if (!e.standard_errors.empty())
          cellstr << " (" << std::setprecision(3) << e.standard_errors[c] << ")";
        os << std::right << std::setw(22) << cellstr.str();
      }
      os << "\n";
    }
    os << std::left << std::setw(14) << "d";
    for (const EstimatorReport& e : cat.estimators) {
      std::ostringstream cellstr;
      cellstr << std::fixed << std::setprecision(4) << e.d;
      os << std::right << std::setw(22) << (e.name == "mle" ? "-" : cellstr.str());
    }
    os << "\n";
    os << std::left << std::setw(14) << "scalar MSE";
    for (const EstimatorReport& e : cat.estimators) {
      std::ostringstream cellstr;
      cellstr << std::setprecision(6) << e.scalar_mse;
      os << std::right << std::setw(22) << cellstr.str();
    }
    os << "\n";
  }
}

}  // namespace liumnl
