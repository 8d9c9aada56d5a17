#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ecomplex/econ.hpp"
#include "ecomplex/rng.hpp"

using namespace ecomplex;

namespace {

PanelObservation obs(const std::string& country, int period, double y,
                     const std::map<std::string, double>& covs) {
  PanelObservation o;
  o.country = country;
  o.cluster_id = country;
  o.period_start = period;
  o.growth = y;
  o.covariates = covs;
  return o;
}

// Synthetic two-period panel with cluster-correlated noise.
std::vector<PanelObservation> simulate_panel(Rng& rng, int n_clusters, int per_cluster,
                                             double beta, double* truth_x_sum = nullptr) {
  std::vector<PanelObservation> panel;
  for (int g = 0; g < n_clusters; ++g) {
    const double cluster_shift = 0.5 * rng.normal();
    const double cluster_noise = 0.5 * rng.normal();
    for (int k = 0; k < per_cluster; ++k) {
      const double x = rng.normal() + cluster_shift;
      const int period = k % 2;
      const double eps = cluster_noise + 0.5 * rng.normal();
      const double y = 0.5 + beta * x + 0.2 * period + eps;
      if (truth_x_sum) *truth_x_sum += x;
      panel.push_back(obs("G" + std::to_string(g), period, y, {{"x", x}}));
    }
  }
  return panel;
}

}  // namespace

TEST_CASE("ols exact fit recovers coefficients with zero residual") {
  std::vector<PanelObservation> panel;
  for (int i = 0; i < 10; ++i)
    panel.push_back(obs("C" + std::to_string(i), 0, 1.0 + 2.0 * i, {{"x", double(i)}}));
  RegressionSpec spec;
  spec.regressors = {"x"};
  spec.include_period_fe = false;
  spec.cluster_by.clear();
  const RegressionResult r = ols_fe(panel, spec);
  CHECK(r.coefficients.at("const") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.coefficients.at("x") == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.se.at("x") < 1e-8);
  CHECK(r.fe_estimates.empty());
}

TEST_CASE("clustered sandwich matches a brute-force oracle to 1e-10") {
  Rng rng(1234);
  const int G = 50, per = 10;
  const auto panel = simulate_panel(rng, G, per, 0.3);
  RegressionSpec spec;
  spec.regressors = {"x"};
  const RegressionResult r = ols_fe(panel, spec);

  // Oracle: rebuild the design, solve, accumulate the meat cluster by
  // cluster, apply G/(G-1)*(N-1)/(N-K).
  const int N = G * per, K = 3;
  Eigen::MatrixXd X(N, K);
  Eigen::VectorXd y(N);
  for (int i = 0; i < N; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = panel[i].covariates.at("x");
    X(i, 2) = panel[i].period_start == 1 ? 1.0 : 0.0;
    y(i) = panel[i].growth;
  }
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(K, K));
  const Eigen::VectorXd beta = xtx_inv * (X.transpose() * y);
  const Eigen::VectorXd u = y - X * beta;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(K, K);
  for (int g = 0; g < G; ++g) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
    for (int i = g * per; i < (g + 1) * per; ++i) s += X.row(i).transpose() * u(i);
    meat += s * s.transpose();
  }
  const double c = double(G) / (G - 1) * double(N - 1) / (N - K);
  const Eigen::VectorXd se = (c * xtx_inv * meat * xtx_inv).diagonal().cwiseSqrt();

  CHECK(std::abs(r.coefficients.at("x") - beta(1)) < 1e-10);
  CHECK(std::abs(r.se.at("const") - se(0)) < 1e-10);
  CHECK(std::abs(r.se.at("x") - se(1)) < 1e-10);
  CHECK(r.n_clusters == G);
}

TEST_CASE("one observation per cluster reduces to HC1-style robust errors") {
  Rng rng(99);
  std::vector<PanelObservation> panel;
  const int N = 60;
  for (int i = 0; i < N; ++i) {
    const double x = rng.normal();
    panel.push_back(obs("C" + std::to_string(i), 0, 1.0 + x + (1 + 0.5 * x * x) * rng.normal(),
                        {{"x", x}}));
  }
  RegressionSpec spec;
  spec.regressors = {"x"};
  spec.include_period_fe = false;
  const RegressionResult r = ols_fe(panel, spec);

  const int K = 2;
  Eigen::MatrixXd X(N, K);
  Eigen::VectorXd y(N);
  for (int i = 0; i < N; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = panel[i].covariates.at("x");
    y(i) = panel[i].growth;
  }
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(K, K));
  const Eigen::VectorXd u = y - X * (xtx_inv * (X.transpose() * y));
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < N; ++i)
    meat += X.row(i).transpose() * X.row(i) * u(i) * u(i);
  // G = N makes the cluster factor N/(N-K), the HC1-style correction.
  const double c = double(N) / (N - 1) * double(N - 1) / (N - K);
  const Eigen::VectorXd se = (c * xtx_inv * meat * xtx_inv).diagonal().cwiseSqrt();
  CHECK(std::abs(r.se.at("x") - se(1)) < 1e-12);
}

TEST_CASE("fe dummies equal within-period demeaning") {
  Rng rng(321);
  std::vector<PanelObservation> panel;
  for (int i = 0; i < 80; ++i) {
    const int period = i % 4;
    const double x = rng.normal();
    const double z = rng.normal();
    const double y = 0.3 * x - 0.7 * z + 0.1 * period + 0.2 * rng.normal();
    panel.push_back(obs("C" + std::to_string(i % 40), period, y, {{"x", x}, {"z", z}}));
  }
  RegressionSpec spec;
  spec.regressors = {"x", "z"};
  const RegressionResult r = ols_fe(panel, spec);

  // Demean y, x, z within each period; regress without intercept.
  std::map<int, std::array<double, 4>> sums;  // y, x, z, count
  for (const auto& o : panel) {
    auto& s = sums[o.period_start];
    s[0] += o.growth;
    s[1] += o.covariates.at("x");
    s[2] += o.covariates.at("z");
    s[3] += 1;
  }
  Eigen::MatrixXd X(panel.size(), 2);
  Eigen::VectorXd y(panel.size());
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& s = sums[panel[i].period_start];
    y(i) = panel[i].growth - s[0] / s[3];
    X(i, 0) = panel[i].covariates.at("x") - s[1] / s[3];
    X(i, 1) = panel[i].covariates.at("z") - s[2] / s[3];
  }
  const Eigen::Vector2d beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  CHECK(std::abs(r.coefficients.at("x") - beta(0)) < 1e-10);
  CHECK(std::abs(r.coefficients.at("z") - beta(1)) < 1e-10);
  CHECK(r.fe_estimates.size() == 3);  // 4 periods, first absorbed
}

TEST_CASE("synthetic DGP recovery: beta within 3 clustered SEs in >= 95 of 100 reps") {
  int hits = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(5000 + rep);
    const auto panel = simulate_panel(rng, 50, 10, 0.3);
    RegressionSpec spec;
    spec.regressors = {"x"};
    const RegressionResult r = ols_fe(panel, spec);
    if (std::abs(r.coefficients.at("x") - 0.3) <= 3.0 * r.se.at("x")) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("error paths: collinearity, clusters, unknown regressor") {
  std::vector<PanelObservation> panel;
  Rng rng(8);
  for (int i = 0; i < 12; ++i) {
    const double x = rng.normal();
    panel.push_back(obs("C" + std::to_string(i % 6), 0, rng.normal(),
                        {{"x", x}, {"x2", 2.0 * x}}));
  }
  RegressionSpec spec;
  spec.regressors = {"x", "x2"};
  spec.include_period_fe = false;
  CHECK_THROWS_AS(ols_fe(panel, spec), Error);
  try {
    ols_fe(panel, spec);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rank_deficient);
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }

  SUBCASE("single cluster is rejected") {
    for (auto& o : panel) o.cluster_id = "same";
    RegressionSpec s2;
    s2.regressors = {"x"};
    s2.include_period_fe = false;
    try {
      ols_fe(panel, s2);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::too_few_clusters);
    }
  }
  SUBCASE("standardized_coefficient rejects unknown names") {
    RegressionSpec s3;
    s3.regressors = {"x"};
    s3.include_period_fe = false;
    s3.cluster_by.clear();
    const RegressionResult r = ols_fe(panel, s3);
    CHECK_THROWS_AS(standardized_coefficient(r, "nope", 1.0, 1.0), Error);
    CHECK(standardized_coefficient(r, "x", 1.0, 4.0) ==
          doctest::Approx(r.coefficients.at("x") / 4.0));
    CHECK(standardized_coefficient(r, "x", 0.0, 4.0) == 0.0);
  }
}

TEST_CASE("r_squared is invariant under affine regressor rescaling") {
  Rng rng(55);
  std::vector<PanelObservation> panel, scaled;
  for (int i = 0; i < 30; ++i) {
    const double x = rng.normal();
    const double y = 0.4 * x + rng.normal();
    panel.push_back(obs("C" + std::to_string(i), 0, y, {{"x", x}}));
    scaled.push_back(obs("C" + std::to_string(i), 0, y, {{"x", 100.0 * x + 3.0}}));
  }
  RegressionSpec spec;
  spec.regressors = {"x"};
  spec.include_period_fe = false;
  spec.cluster_by.clear();
  const RegressionResult a = ols_fe(panel, spec);
  const RegressionResult b = ols_fe(scaled, spec);
  CHECK(a.r_squared == doctest::Approx(b.r_squared).epsilon(1e-12));
  CHECK(a.coefficients.at("x") == doctest::Approx(100.0 * b.coefficients.at("x")).epsilon(1e-10));
  CHECK(a.star_codes.at("x") == b.star_codes.at("x"));
}

TEST_CASE("student t two-sided p-values match reference values") {
  // Frozen against scipy.stats.t.sf.
  CHECK(student_t_two_sided_p(2.0, 10) == doctest::Approx(0.0733880347707404).epsilon(1e-12));
  CHECK(student_t_two_sided_p(2.228138852, 10) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(student_t_two_sided_p(1.0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(student_t_two_sided_p(2.5, 49) == doctest::Approx(0.0158157888471801).epsilon(1e-12));
  CHECK(student_t_two_sided_p(3.0, 199) == doctest::Approx(0.00304482672510617).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.5, 5) == doctest::Approx(0.638298871640929).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.0, 7) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("information criteria agree with a brute-force likelihood oracle") {
  Rng rng(77);
  std::vector<PanelObservation> panel;
  for (int i = 0; i < 40; ++i) {
    const double x = rng.normal(), z = rng.normal();
    panel.push_back(obs("C" + std::to_string(i), 0, 0.8 * x + 0.3 * rng.normal(),
                        {{"x", x}, {"z", z}}));
  }
  RegressionSpec small, large;
  small.regressors = {"x"};
  large.regressors = {"x", "z"};
  small.include_period_fe = large.include_period_fe = false;
  small.cluster_by = large.cluster_by = "";
  const RegressionResult rs = ols_fe(panel, small);
  const RegressionResult rl = ols_fe(panel, large);

  auto oracle = [&](const std::vector<std::string>& names) {
    const int n = static_cast<int>(panel.size());
    const int k = static_cast<int>(names.size()) + 1;
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (int j = 0; j < k - 1; ++j) X(i, 1 + j) = panel[i].covariates.at(names[j]);
      y(i) = panel[i].growth;
    }
    const Eigen::VectorXd u = y - X * (X.transpose() * X).ldlt().solve(X.transpose() * y);
    const double rss = u.squaredNorm();
    const double ll = -0.5 * n * (std::log(2 * M_PI) + std::log(rss / n) + 1.0);
    return std::array<double, 3>{-2 * ll + 2 * k, -2 * ll + k * std::log(double(n)),
                                 -2 * ll + 2 * k * std::log(std::log(double(n)))};
  };
  const auto os = oracle({"x"});
  const auto ol = oracle({"x", "z"});
  CHECK(rs.info_criteria.aic == doctest::Approx(os[0]).epsilon(1e-10));
  CHECK(rs.info_criteria.bic == doctest::Approx(os[1]).epsilon(1e-10));
  CHECK(rs.info_criteria.hq == doctest::Approx(os[2]).epsilon(1e-10));
  // The noise variable must not be preferred by any criterion.
  CHECK(rs.info_criteria.aic < rl.info_criteria.aic);
  CHECK((rs.info_criteria.aic < rl.info_criteria.aic) == (os[0] < ol[0]));
  CHECK((rs.info_criteria.bic < rl.info_criteria.bic) == (os[1] < ol[1]));
  CHECK((rs.info_criteria.hq < rl.info_criteria.hq) == (os[2] < ol[2]));
}

TEST_CASE("growth_regression column recipes") {
  Rng rng(404);
  std::vector<PanelObservation> panel;
  for (int i = 0; i < 60; ++i) {
    const int period = i % 2;
    std::map<std::string, double> covs{{"log_initial_gdp", 8.0 + rng.normal()},
                                       {"nr_increase", 0.1 * rng.normal()},
                                       {"coi", rng.normal()},
                                       {"eci", rng.normal()},
                                       {"diversity", rng.normal()}};
    const double y = 0.5 - 0.03 * covs["log_initial_gdp"] + 0.3 * covs["nr_increase"] +
                     0.04 * covs["eci"] + 0.005 * covs["coi"] + 0.05 * period +
                     0.05 * rng.normal();
    panel.push_back(obs("C" + std::to_string(i % 30), period, y, covs));
  }
  const std::vector<std::string> controls{"log_initial_gdp", "nr_increase", "coi"};

  SUBCASE("standard column clusters by country and includes FE") {
    const GrowthColumn col = growth_regression(panel, {"eci"}, controls);
    CHECK(col.result.n_clusters == 30);
    CHECK(col.result.fe_estimates.size() == 1);
    CHECK(col.result.coefficients.count("eci") == 1);
  }
  SUBCASE("no-FE variant uses ordinary errors and no dummies") {
    const GrowthColumn col =
        growth_regression(panel, {"eci"}, controls, GrowthVariant::no_period_fe);
    CHECK(col.result.fe_estimates.empty());
    CHECK(col.result.n_clusters == 0);
  }
  SUBCASE("two complexity rows appear in the combined column") {
    const GrowthColumn col = growth_regression(panel, {"eci", "diversity"}, controls);
    CHECK(col.result.coefficients.count("eci") == 1);
    CHECK(col.result.coefficients.count("diversity") == 1);
    CHECK(col.row_order.back() == "diversity");
  }
}

TEST_CASE("growth_regression power: true effect found in >= 90% of 200 reps") {
  int significant = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng rng(9000 + rep);
    std::vector<PanelObservation> panel;
    for (int i = 0; i < 100; ++i) {
      const double country_noise = 0.03 * rng.normal();
      for (int period = 0; period < 2; ++period) {
        std::map<std::string, double> covs{{"log_initial_gdp", 9.0 + rng.normal()},
                                           {"nr_increase", 0.1 * rng.normal()},
                                           {"coi", rng.normal()},
                                           {"eci", rng.normal()}};
        const double y = 0.5 + 0.04 * covs["eci"] - 0.02 * covs["log_initial_gdp"] +
                         0.3 * covs["nr_increase"] + 0.005 * covs["coi"] + 0.05 * period +
                         country_noise + 0.05 * rng.normal();
        panel.push_back(obs("C" + std::to_string(i), period, y, covs));
      }
    }
    const GrowthColumn col =
        growth_regression(panel, {"eci"}, {"log_initial_gdp", "nr_increase", "coi"});
    if (col.result.p_values.at("eci") < 0.05) ++significant;
  }
  CHECK(significant >= 180);
}

TEST_CASE("partial_correlation matches the one-control recursion formula") {
  Rng rng(2718);
  std::vector<PanelObservation> panel;
  const int n = 120;
  Eigen::VectorXd xs(n), ys(n), zs(n);
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    const double x = 0.7 * z + rng.normal();
    const double y = -0.4 * z + 0.5 * x + rng.normal();
    xs(i) = x;
    ys(i) = y;
    zs(i) = z;
    panel.push_back(obs("C" + std::to_string(i), 0, 0, {{"x", x}, {"y", y}, {"z", z}}));
  }
  auto corr = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd da = a.array() - a.mean(), db = b.array() - b.mean();
    return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
  };
  const double rxy = corr(xs, ys), rxz = corr(xs, zs), ryz = corr(ys, zs);
  const double want = (rxy - rxz * ryz) / std::sqrt((1 - rxz * rxz) * (1 - ryz * ryz));
  CHECK(partial_correlation(panel, "x", "y", {"z"}) == doctest::Approx(want).epsilon(1e-12));
  CHECK(partial_correlation(panel, "x", "y", {}) == doctest::Approx(rxy).epsilon(1e-12));
  CHECK_THROWS_AS(partial_correlation(panel, "x", "nope", {"z"}), Error);
}

TEST_CASE("pci_service_regression recovers an exact shift") {
  // Year effects plus a pure +1.0 service shift: any within-group structure
  // has to be identical across groups for the dummy to equal the shift.
  std::vector<PciPanelRow> rows;
  for (int year = 1995; year < 2005; ++year)
    for (int j = 0; j < 10; ++j) {
      const bool service = j >= 6;
      const double base = -0.3 + 0.02 * (year - 1995);
      rows.push_back({year, "P" + std::to_string(j), service ? base + 1.0 : base, service});
    }
  const RegressionResult r = pci_service_regression(rows);
  CHECK(r.coefficients.at("service_dummy") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.n_obs == 100);
  // The constant is the average goods complexity net of year effects.
  CHECK(r.coefficients.at("const") == doctest::Approx(-0.3).epsilon(1e-8));

  SUBCASE("noisy shift is recovered within 3 SEs") {
    Rng rng(616);
    std::vector<PciPanelRow> noisy = rows;
    for (auto& row : noisy) row.pci += 0.3 * rng.normal();
    const RegressionResult rn = pci_service_regression(noisy);
    CHECK(std::abs(rn.coefficients.at("service_dummy") - 1.0) <=
          3.0 * rn.se.at("service_dummy"));
  }
  SUBCASE("a year without services is rejected") {
    std::vector<PciPanelRow> bad = rows;
    bad.push_back({2010, "G", 0.0, false});
    CHECK_THROWS_AS(pci_service_regression(bad), Error);
  }
}
