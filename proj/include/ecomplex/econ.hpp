#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ecomplex/data.hpp"

namespace ecomplex {

struct RegressionSpec {
  std::string dependent = "growth";
  std::vector<std::string> regressors;
  bool include_period_fe = true;
  std::string cluster_by = "country";  // empty -> ordinary standard errors
  std::array<double, 3> significance_levels{0.01, 0.05, 0.1};

  void validate() const;
};

struct InfoCriteria {
  double aic = 0.0;
  double bic = 0.0;
  double hq = 0.0;
};

/// OLS output. Keys cover the intercept ("const") and every regressor;
/// period fixed effects are reported separately keyed by period, with the
/// first (sorted) period absorbed into the intercept as baseline.
struct RegressionResult {
  std::map<std::string, double> coefficients;
  std::map<std::string, double> se;
  std::map<std::string, double> t_stats;
  std::map<std::string, double> p_values;
  std::map<std::string, std::string> star_codes;
  double r_squared = 0.0;
  int n_obs = 0;
  int n_clusters = 0;  // 0 when ordinary SEs were used
  int df_resid = 0;
  std::map<int, double> fe_estimates;
  InfoCriteria info_criteria;
};

/// Two-sided p-value of a Student-t statistic.
double student_t_two_sided_p(double t, double dof);

/// Panel OLS with an intercept, optional period dummies, and either ordinary
/// or cluster-robust sandwich standard errors with the small-sample factor
/// G/(G-1) * (N-1)/(N-K). p-values use G-1 degrees of freedom under
/// clustering, N-K otherwise. Information criteria come from the Gaussian
/// log-likelihood with k = number of estimated coefficients.
/// Throws rank_deficient (naming the collinear columns) and too_few_clusters.
RegressionResult ols_fe(const std::vector<PanelObservation>& panel, const RegressionSpec& spec);

/// beta_x * sd_x / sd_y. Throws unknown_regressor.
double standardized_coefficient(const RegressionResult& result, const std::string& x,
                                double sd_x, double sd_y);

/// Pearson correlation of x and y after partialling out the named controls
/// (correlation of the two OLS residual vectors). Panels missing any of the
/// series raise unknown_regressor.
double partial_correlation(const std::vector<PanelObservation>& panel, const std::string& x,
                           const std::string& y, const std::vector<std::string>& controls);

enum class GrowthVariant { standard, no_period_fe };

/// One formatted growth-table column. The no-FE variant drops the period
/// dummies and switches to ordinary standard errors.
struct GrowthColumn {
  RegressionResult result;
  std::vector<std::string> row_order;  // controls then complexity variables
  GrowthVariant variant = GrowthVariant::standard;
};

GrowthColumn growth_regression(const std::vector<PanelObservation>& panel,
                               const std::vector<std::string>& complexity_vars,
                               const std::vector<std::string>& controls,
                               GrowthVariant variant = GrowthVariant::standard);

struct PciPanelRow {
  int year = 0;
  std::string product;
  double pci = 0.0;
  bool is_service = false;
};

/// Pooled OLS of PCI on a service dummy with year fixed effects, clustered
/// by product. Every year must contain both kinds (missing_kind otherwise).
/// The dummy coefficient is reported under "service_dummy".
RegressionResult pci_service_regression(const std::vector<PciPanelRow>& rows);

}  // namespace ecomplex
