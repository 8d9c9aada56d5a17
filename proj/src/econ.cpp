#include "ecomplex/econ.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ecomplex {

void RegressionSpec::validate() const {
  if (regressors.empty()) fail(Errc::invalid_argument, "no regressors");
  std::set<std::string> seen(regressors.begin(), regressors.end());
  if (seen.size() != regressors.size()) fail(Errc::invalid_argument, "duplicate regressor");
  if (seen.count(dependent)) fail(Errc::invalid_argument, "dependent among regressors");
}

namespace {

// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction
// (Numerical Recipes form); enough for t-distribution tails.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

std::string stars_for(double p, const std::array<double, 3>& levels) {
  if (p < levels[0]) return "***";
  if (p < levels[1]) return "**";
  if (p < levels[2]) return "*";
  return "";
}

}  // namespace

double student_t_two_sided_p(double t, double dof) {
  if (dof <= 0) fail(Errc::invalid_argument, "dof must be positive");
  if (!std::isfinite(t)) return 0.0;
  return reg_inc_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

RegressionResult ols_fe(const std::vector<PanelObservation>& panel, const RegressionSpec& spec) {
  spec.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(panel.size());
  if (n == 0) fail(Errc::invalid_argument, "empty panel");

  std::set<int> period_set;
  for (const auto& obs : panel) period_set.insert(obs.period_start);
  std::vector<int> periods(period_set.begin(), period_set.end());
  const std::size_t n_dummies = spec.include_period_fe && periods.size() > 1
                                    ? periods.size() - 1
                                    : 0;

  std::vector<std::string> columns{"const"};
  columns.insert(columns.end(), spec.regressors.begin(), spec.regressors.end());
  std::vector<int> dummy_period;
  for (std::size_t k = 1; k <= n_dummies; ++k) {
    dummy_period.push_back(periods[k]);
    columns.push_back("fe_" + std::to_string(periods[k]));
  }
  const Eigen::Index K = static_cast<Eigen::Index>(columns.size());
  if (n < K + 1)
    fail(Errc::invalid_argument, "need at least K+1 observations, got " + std::to_string(n));

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, K);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = panel[i];
    y(i) = obs.growth;
    X(i, 0) = 1.0;
    for (std::size_t r = 0; r < spec.regressors.size(); ++r) {
      const auto it = obs.covariates.find(spec.regressors[r]);
      if (it == obs.covariates.end())
        fail(Errc::unknown_regressor,
             spec.regressors[r] + " missing for " + obs.country + "/" +
                 std::to_string(obs.period_start));
      X(i, 1 + r) = it->second;
    }
    for (std::size_t k = 0; k < n_dummies; ++k)
      if (obs.period_start == dummy_period[k])
        X(i, 1 + static_cast<Eigen::Index>(spec.regressors.size() + k)) = 1.0;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < K) {
    std::string names;
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < K; ++k)
      names += (names.empty() ? "" : ", ") + columns[perm(k)];
    fail(Errc::rank_deficient, "collinear columns: " + names);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();

  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(K, K));

  RegressionResult out;
  out.n_obs = static_cast<int>(n);
  out.df_resid = static_cast<int>(n - K);
  out.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;

  Eigen::VectorXd se(K);
  double p_dof = 0.0;
  if (spec.cluster_by.empty()) {
    const double sigma2 = rss / static_cast<double>(n - K);
    se = (sigma2 * xtx_inv.diagonal()).cwiseSqrt();
    p_dof = static_cast<double>(n - K);
  } else {
    std::map<std::string, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) groups[panel[i].cluster_id].push_back(i);
    const double G = static_cast<double>(groups.size());
    if (groups.size() < 2)
      fail(Errc::too_few_clusters, "need at least 2 clusters, got " + std::to_string(groups.size()));
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(K, K);
    for (const auto& [id, rows] : groups) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
      for (const Eigen::Index i : rows) s += X.row(i).transpose() * resid(i);
      meat += s * s.transpose();
    }
    const double correction =
        G / (G - 1.0) * (static_cast<double>(n) - 1.0) / static_cast<double>(n - K);
    const Eigen::MatrixXd vcov = correction * xtx_inv * meat * xtx_inv;
    se = vcov.diagonal().cwiseSqrt();
    out.n_clusters = static_cast<int>(groups.size());
    p_dof = G - 1.0;
  }

  for (Eigen::Index k = 0; k < K; ++k) {
    const std::string& name = columns[k];
    out.coefficients[name] = beta(k);
    out.se[name] = se(k);
    const double t = se(k) > 0 ? beta(k) / se(k)
                               : (beta(k) == 0 ? 0.0
                                               : std::numeric_limits<double>::infinity() *
                                                     (beta(k) > 0 ? 1 : -1));
    out.t_stats[name] = t;
    out.p_values[name] = student_t_two_sided_p(t, p_dof);
    out.star_codes[name] = stars_for(out.p_values[name], spec.significance_levels);
  }
  for (std::size_t k = 0; k < n_dummies; ++k)
    out.fe_estimates[dummy_period[k]] =
        beta(1 + static_cast<Eigen::Index>(spec.regressors.size() + k));

  const double nn = static_cast<double>(n);
  const double loglik = -0.5 * nn * (std::log(2.0 * M_PI) + std::log(rss / nn) + 1.0);
  const double k_params = static_cast<double>(K);
  out.info_criteria.aic = -2.0 * loglik + 2.0 * k_params;
  out.info_criteria.bic = -2.0 * loglik + k_params * std::log(nn);
  out.info_criteria.hq = -2.0 * loglik + 2.0 * k_params * std::log(std::log(nn));
  return out;
}

double standardized_coefficient(const RegressionResult& result, const std::string& x,
                                double sd_x, double sd_y) {
  if (sd_y <= 0) fail(Errc::invalid_argument, "sd_y must be positive");
  const auto it = result.coefficients.find(x);
  if (it == result.coefficients.end()) fail(Errc::unknown_regressor, x);
  return it->second * sd_x / sd_y;
}

double partial_correlation(const std::vector<PanelObservation>& panel, const std::string& x,
                           const std::string& y, const std::vector<std::string>& controls) {
  const Eigen::Index n = static_cast<Eigen::Index>(panel.size());
  const Eigen::Index k = static_cast<Eigen::Index>(controls.size()) + 1;
  if (n < k + 2) fail(Errc::invalid_argument, "not enough observations");
  auto column = [&](const std::string& name) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto it = panel[i].covariates.find(name);
      if (it == panel[i].covariates.end())
        fail(Errc::unknown_regressor, name + " missing for " + panel[i].country);
      v(i) = it->second;
    }
    return v;
  };
  Eigen::MatrixXd Z(n, k);
  Z.col(0).setOnes();
  for (Eigen::Index j = 1; j < k; ++j) Z.col(j) = column(controls[j - 1]);
  const auto residualize = [&](const Eigen::VectorXd& v) {
    return (v - Z * (Z.transpose() * Z).ldlt().solve(Z.transpose() * v)).eval();
  };
  const Eigen::VectorXd rx = residualize(column(x));
  const Eigen::VectorXd ry = residualize(column(y));
  const double denom = std::sqrt(rx.squaredNorm() * ry.squaredNorm());
  if (denom == 0) fail(Errc::invalid_argument, "degenerate residuals");
  return rx.dot(ry) / denom;
}

GrowthColumn growth_regression(const std::vector<PanelObservation>& panel,
                               const std::vector<std::string>& complexity_vars,
                               const std::vector<std::string>& controls,
                               GrowthVariant variant) {
  RegressionSpec spec;
  spec.regressors = controls;
  spec.regressors.insert(spec.regressors.end(), complexity_vars.begin(), complexity_vars.end());
  spec.include_period_fe = variant == GrowthVariant::standard;
  // The paper's no-FE robustness column reports ordinary standard errors.
  spec.cluster_by = variant == GrowthVariant::standard ? "country" : "";

  GrowthColumn column;
  column.variant = variant;
  column.row_order = spec.regressors;
  column.result = ols_fe(panel, spec);
  return column;
}

RegressionResult pci_service_regression(const std::vector<PciPanelRow>& rows) {
  if (rows.empty()) fail(Errc::invalid_argument, "empty PCI panel");
  std::map<int, std::pair<bool, bool>> kinds_by_year;
  for (const auto& r : rows) {
    auto& [goods, services] = kinds_by_year[r.year];
    (r.is_service ? services : goods) = true;
  }
  for (const auto& [year, kinds] : kinds_by_year)
    if (!kinds.first || !kinds.second)
      fail(Errc::missing_kind, "year " + std::to_string(year) + " lacks goods or services");

  std::vector<PanelObservation> panel;
  panel.reserve(rows.size());
  for (const auto& r : rows) {
    PanelObservation obs;
    obs.country = r.product;  // cross-section unit is the product
    obs.cluster_id = r.product;
    obs.period_start = r.year;
    obs.growth = r.pci;
    obs.covariates["service_dummy"] = r.is_service ? 1.0 : 0.0;
    panel.push_back(std::move(obs));
  }
  RegressionSpec spec;
  spec.dependent = "pci";
  spec.regressors = {"service_dummy"};
  spec.include_period_fe = true;
  spec.cluster_by = "product";
  return ols_fe(panel, spec);
}

}  // namespace ecomplex
