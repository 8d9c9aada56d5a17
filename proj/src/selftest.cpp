#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include "ecomplex/econ.hpp"
#include "ecomplex/io.hpp"
#include "ecomplex/pipeline.hpp"
#include "ecomplex/reflections.hpp"
#include "ecomplex/rng.hpp"
#include "ecomplex/stats.hpp"

namespace ecomplex {

namespace {

IncidenceMatrix random_pruned_incidence(Rng& rng, Eigen::Index n_c, Eigen::Index n_p,
                                        double density) {
  for (;;) {
    Eigen::MatrixXd bits(n_c, n_p);
    for (Eigen::Index i = 0; i < n_c; ++i)
      for (Eigen::Index j = 0; j < n_p; ++j) bits(i, j) = rng.uniform() < density ? 1.0 : 0.0;
    RcaMatrix r;
    r.values = bits;  // already 0/1; binarize at 0.5 only prunes
    for (Eigen::Index i = 0; i < n_c; ++i) r.countries.push_back("C" + std::to_string(i));
    for (Eigen::Index j = 0; j < n_p; ++j) r.products.push_back("P" + std::to_string(j));
    r.product_kind.assign(n_p, ProductKind::good);
    try {
      return binarize(r, 0.5);
    } catch (const Error&) {
      continue;  // everything pruned; redraw
    }
  }
}

ExportMatrix random_exports(Rng& rng, Eigen::Index n_c, Eigen::Index n_p) {
  ExportMatrix ex;
  ex.year = 2000;
  for (Eigen::Index i = 0; i < n_c; ++i) ex.countries.push_back("C" + std::to_string(i));
  for (Eigen::Index j = 0; j < n_p; ++j) ex.products.push_back("P" + std::to_string(j));
  ex.product_kind.assign(n_p, ProductKind::good);
  ex.values.resize(n_c, n_p);
  for (Eigen::Index i = 0; i < n_c; ++i)
    for (Eigen::Index j = 0; j < n_p; ++j) ex.values(i, j) = 0.1 + rng.uniform();
  return ex;
}

class Runner {
 public:
  explicit Runner(std::ostream& out) : out_(out) {}

  void check(const std::string& name, const std::function<std::string()>& body) {
    std::string detail;
    try {
      detail = body();
    } catch (const std::exception& e) {
      detail = e.what();
    }
    if (detail.empty()) {
      out_ << "PASS " << name << "\n";
    } else {
      out_ << "FAIL " << name << ": " << detail << "\n";
      ++failures_;
    }
  }

  int failures() const { return failures_; }

 private:
  std::ostream& out_;
  int failures_ = 0;
};

std::string expect(bool ok, const std::string& detail) { return ok ? "" : detail; }

}  // namespace

int selftest(std::ostream& out, const SelfTestOptions& opt) {
  Runner runner(out);
  const IncidenceMatrix triangular = fixture_incidence("triangular");
  const IncidenceMatrix nested = fixture_incidence("nested");

  runner.check("rca-rank1-identity", [&] {
    double worst = 0;
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(opt.seed + seed);
      Eigen::VectorXd a(6), b(5);
      for (int i = 0; i < 6; ++i) a(i) = 0.5 + rng.uniform();
      for (int j = 0; j < 5; ++j) b(j) = 0.5 + rng.uniform();
      const Eigen::MatrixXd rank1 = a * b.transpose();
      worst = std::max(worst, (rca_values(rank1).array() - 1.0).abs().maxCoeff());
    }
    return expect(worst < 1e-12, "max |RCA-1| = " + format_double(worst));
  });

  runner.check("rca-scale-invariance", [&] {
    Rng rng(opt.seed + 1);
    const ExportMatrix ex = random_exports(rng, 8, 6);
    const Eigen::MatrixXd base = rca_values(ex.values);
    const Eigen::MatrixXd scaled = rca_values((37.5 * ex.values).eval());
    const double diff = (base - scaled).cwiseAbs().maxCoeff();
    return expect(diff < 1e-12, "scale drift " + format_double(diff));
  });

  runner.check("rca-weighted-mean-identity", [&] {
    Rng rng(opt.seed + 2);
    const ExportMatrix ex = random_exports(rng, 9, 7);
    const Eigen::MatrixXd r = rca_values(ex.values);
    const double total = ex.values.sum();
    double worst = 0;
    for (Eigen::Index j = 0; j < ex.values.cols(); ++j) {
      double mean = 0;  // export-share-weighted average of RCA over countries
      for (Eigen::Index i = 0; i < ex.values.rows(); ++i)
        mean += ex.values.row(i).sum() / total * r(i, j);
      worst = std::max(worst, std::abs(mean - 1.0));
    }
    return expect(worst < 1e-12, "weighted-mean drift " + format_double(worst));
  });

  runner.check("binarize-threshold-inclusive", [&] {
    RcaMatrix r;
    r.countries = {"A", "B"};
    r.products = {"p", "q"};
    r.product_kind = {ProductKind::good, ProductKind::good};
    r.values.resize(2, 2);
    r.values << 1.0, 0.5, 0.25, 2.0;
    const IncidenceMatrix m = binarize(r);
    return expect(m.bits(0, 0) == 1.0, "RCA exactly 1.0 must map to a link");
  });

  runner.check("coupling-row-stochastic", [&] {
    double worst = 0;
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(opt.seed + 10 + seed);
      const IncidenceMatrix m = random_pruned_incidence(rng, 12, 9, 0.4);
      const Eigen::VectorXd rc = coupling_matrix(m, CouplingKind::country).rowwise().sum();
      const Eigen::VectorXd rp = coupling_matrix(m, CouplingKind::product).rowwise().sum();
      worst = std::max({worst, (rc.array() - 1).abs().maxCoeff(), (rp.array() - 1).abs().maxCoeff()});
    }
    return expect(worst < 1e-12, "row-sum drift " + format_double(worst));
  });

  runner.check("eci-triangular-fixture", [&] {
    const ComplexityIndex result = eci(triangular, 1e-9);
    if (std::abs(result.spectral.eigenvalue - 0.25) > 1e-12)
      return "lambda_2 = " + format_double(result.spectral.eigenvalue);
    Eigen::Vector3d want(1, 0, -1);
    const double diff = (result.scores.values - want).cwiseAbs().maxCoeff();
    return expect(diff < 1e-9, "ECI drift " + format_double(diff));
  });

  runner.check("eci-permutation-invariance", [&] {
    Rng rng(opt.seed + 3);
    const IncidenceMatrix m = random_pruned_incidence(rng, 15, 12, 0.4);
    const ComplexityIndex base = eci(m, 1e-9);
    IncidenceMatrix perm = m;
    std::reverse(perm.countries.begin(), perm.countries.end());
    perm.bits = m.bits.colwise().reverse().eval();
    const ComplexityIndex permuted = eci(perm, 1e-9);
    double worst = 0;
    for (std::size_t i = 0; i < m.countries.size(); ++i)
      worst = std::max(worst, std::abs(base.scores.at(m.countries[i]) -
                                       permuted.scores.at(m.countries[i])));
    return expect(worst < 1e-12, "permutation drift " + format_double(worst));
  });

  runner.check("mr-fixture", [&] {
    const MrIterates it = mr_iterate(triangular, 1);
    Eigen::Vector3d want(2.0, 2.5, 3.0);
    const double diff = (it.country.values - want).cwiseAbs().maxCoeff();
    return expect(diff < 1e-12, "c_1 drift " + format_double(diff));
  });

  runner.check("mr-variance-decreasing", [&] {
    Rng rng(opt.seed + 4);
    const IncidenceMatrix m = random_pruned_incidence(rng, 10, 8, 0.5);
    auto spread = [&](int n) {
      const Eigen::VectorXd c = mr_iterate(m, n).country.values;
      return (c.array() - c.mean()).abs().maxCoeff();
    };
    return expect(spread(12) < spread(4) || spread(12) < 1e-12,
                  "even iterates are not collapsing");
  });

  runner.check("fcm-fixture-trajectory", [&] {
    FitnessOptions fopt;
    fopt.max_iter = 2;
    const FixedPointResult r = fcm(nested, fopt);
    const double drift =
        std::max(std::abs(r.country_scores.values(0) - 1.6), std::abs(r.country_scores.values(1) - 0.4));
    return expect(drift < 1e-12, "second iterate drift " + format_double(drift));
  });

  runner.check("fcm-zero-convergence", [&] {
    FitnessOptions fopt;
    fopt.zero_floor = 1e-3;
    fopt.max_iter = 10000;
    const FixedPointResult r = fcm(nested, fopt);
    if (r.verdict != FitnessVerdict::zero_convergence)
      return std::string("verdict ") + to_string(r.verdict);
    return expect(r.country_scores.values.minCoeff() < 1e-3, "min fitness too large");
  });

  runner.check("mfcm-allones-fixed-point", [&] {
    for (int n = 2; n <= 10; ++n) {
      IncidenceMatrix m;
      m.bits = Eigen::MatrixXd::Ones(n, n);
      for (int i = 0; i < n; ++i) {
        m.countries.push_back("C" + std::to_string(i));
        m.products.push_back("P" + std::to_string(i));
      }
      m.product_kind.assign(n, ProductKind::good);
      const FixedPointResult r = mfcm(m);
      if (r.verdict != FitnessVerdict::converged || r.iterations != 1)
        return "n=" + std::to_string(n) + " verdict " + to_string(r.verdict) + " iters " +
               std::to_string(r.iterations);
      const double drift = std::max((r.country_scores.values.array() - 1).abs().maxCoeff(),
                                    (r.product_scores.values.array() - 1).abs().maxCoeff());
      if (drift > 1e-12) return "n=" + std::to_string(n) + " drift " + format_double(drift);
    }
    return std::string();
  });

  runner.check("mfcm-boundary-drift", [&] {
    const FixedPointResult r = mfcm(nested);
    if (r.verdict != FitnessVerdict::boundary_drift)
      return std::string("verdict ") + to_string(r.verdict);
    double x = r.trajectory[0].max_c, worst = std::abs(x - 4.0 / 3.0);
    for (int k = 1; k <= 50; ++k) {
      x = (4.0 - x) / (3.0 - x);
      worst = std::max(worst, std::abs(r.trajectory[k].max_c - x));
    }
    return expect(worst < 1e-10, "recurrence drift " + format_double(worst));
  });

  runner.check("fitness-normalization-sums", [&] {
    Rng rng(opt.seed + 5);
    const IncidenceMatrix m = random_pruned_incidence(rng, 14, 11, 0.4);
    FixedPointResult r = mfcm(m);
    if (opt.inject_normalization_fault) r.country_scores.values *= 1.01;  // fault hook
    const double dc = std::abs(r.country_scores.values.sum() - double(m.n_countries()));
    const double dp = std::abs(r.product_scores.values.sum() - double(m.n_products()));
    return expect(dc < 1e-12 && dp < 1e-12,
                  "sum drift c=" + format_double(dc) + " p=" + format_double(dp));
  });

  runner.check("mfcm-steady-state-bounds", [&] {
    for (int seed = 0; seed < 20; ++seed) {
      Rng rng(opt.seed + 100 + seed);
      const IncidenceMatrix m = random_pruned_incidence(rng, 20, 15, 0.4);
      const FixedPointResult r = mfcm(m);
      if (r.verdict != FitnessVerdict::converged)
        return "seed " + std::to_string(seed) + " verdict " + to_string(r.verdict);
      const double n_c = static_cast<double>(m.n_countries());
      const Eigen::VectorXd& c = r.country_scores.values;
      if (!(c.minCoeff() > 0 && c.maxCoeff() < n_c))
        return "seed " + std::to_string(seed) + " scores outside (0, N_c)";
      const Eigen::VectorXd denom = m.bits.transpose() * (n_c - c.array()).matrix();
      const Eigen::VectorXd u = m.bits.colwise().sum();
      for (Eigen::Index j = 0; j < denom.size(); ++j)
        if (!(1.0 / denom(j) >= 1.0 / (n_c * u(j)) - 1e-15))
          return "seed " + std::to_string(seed) + " pre-normalization bound violated";
    }
    return std::string();
  });

  runner.check("spearman-fixture", [&] {
    Ranking a, b;
    a.labels = b.labels = {"w", "x", "y", "z"};
    a.ranks = Eigen::Vector4d(1, 2, 3, 4);
    b.ranks = Eigen::Vector4d(1, 3, 2, 4);
    return expect(std::abs(spearman(a, b) - 0.8) < 1e-15, "expected 0.8");
  });

  runner.check("spearman-monotone-invariance", [&] {
    Rng rng(opt.seed + 6);
    ScoreVector s;
    s.kind = ScoreKind::country;
    s.metric = "test";
    s.values.resize(20);
    for (int i = 0; i < 20; ++i) {
      s.labels.push_back("C" + std::to_string(i));
      s.values(i) = rng.uniform(-2, 2);
    }
    ScoreVector t = s;
    t.values = s.values.array().exp();
    const Ranking ra = rank_scores(s), rb = rank_scores(t);
    const double diff = (ra.ranks - rb.ranks).cwiseAbs().maxCoeff();
    return expect(diff == 0, "ranks changed under exp");
  });

  runner.check("rank-tie-averaging", [&] {
    ScoreVector s;
    s.kind = ScoreKind::country;
    s.metric = "test";
    s.labels = {"a", "b", "c"};
    s.values = Eigen::Vector3d(5, 5, 3);
    const Ranking r = rank_scores(s);
    return expect(r.ranks(0) == 1.5 && r.ranks(1) == 1.5 && r.ranks(2) == 3.0,
                  "tie averaging broken");
  });

  runner.check("box-stats-fixture", [&] {
    ScoreVector s;
    s.kind = ScoreKind::country;
    s.metric = "test";
    Eigen::VectorXd v(8);
    v << 1, 2, 3, 4, 5, 6, 7, 100;
    s.values = v;
    for (int i = 0; i < 8; ++i) s.labels.push_back("C" + std::to_string(i));
    const BoxStats b = box_stats(s);
    const bool ok = b.median == 4.5 && b.q1 == 2.5 && b.q3 == 6.5 && b.iqr == 4.0 &&
                    b.upper_fence == 12.5 && b.outliers == std::vector<std::string>{"C7"};
    return expect(ok, "hinge quartiles drifted");
  });

  runner.check("taylor-identity", [&] {
    for (double delta = -0.5; delta <= 0.5001; delta += 0.01) {
      const int n_c = 100;
      const double c = (1.0 + delta) * n_c / 2.0;
      const TaylorComparison t = taylor_consistency(c, n_c);
      const double identity = std::abs(delta * delta / (1.0 + delta));
      if (std::abs(t.rel_err - identity) > 1e-12)
        return "identity drift at delta " + format_double(delta);
      if (t.rel_err > 2.0 * delta * delta + 1e-15)
        return "2 delta^2 bound violated at delta " + format_double(delta);
    }
    return std::string();
  });

  runner.check("ols-exact-fit", [&] {
    std::vector<PanelObservation> panel;
    for (int i = 0; i < 12; ++i) {
      PanelObservation obs;
      obs.country = "C" + std::to_string(i);
      obs.cluster_id = obs.country;
      obs.period_start = 0;
      obs.covariates["x"] = i;
      obs.growth = 1.0 + 2.0 * i;
      panel.push_back(obs);
    }
    RegressionSpec spec;
    spec.regressors = {"x"};
    spec.include_period_fe = false;
    spec.cluster_by.clear();
    const RegressionResult r = ols_fe(panel, spec);
    const bool ok = std::abs(r.coefficients.at("const") - 1.0) < 1e-10 &&
                    std::abs(r.coefficients.at("x") - 2.0) < 1e-10 && r.r_squared > 1 - 1e-12;
    return expect(ok, "exact fit not recovered");
  });

  runner.check("cluster-sandwich-oracle", [&] {
    Rng rng(opt.seed + 7);
    std::vector<PanelObservation> panel;
    const int G = 10, per = 5;
    for (int g = 0; g < G; ++g)
      for (int k = 0; k < per; ++k) {
        PanelObservation obs;
        obs.country = "C" + std::to_string(g);
        obs.cluster_id = obs.country;
        obs.period_start = k % 2;
        obs.covariates["x"] = rng.normal();
        obs.growth = 0.5 + 0.3 * obs.covariates["x"] + 0.2 * rng.normal();
        panel.push_back(obs);
      }
    RegressionSpec spec;
    spec.regressors = {"x"};
    const RegressionResult r = ols_fe(panel, spec);

    // Brute-force sandwich on the same design.
    const int N = G * per, K = 3;
    Eigen::MatrixXd X(N, K);
    Eigen::VectorXd y(N);
    for (int i = 0; i < N; ++i) {
      X(i, 0) = 1;
      X(i, 1) = panel[i].covariates.at("x");
      X(i, 2) = panel[i].period_start == 1 ? 1.0 : 0.0;
      y(i) = panel[i].growth;
    }
    const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    const Eigen::VectorXd u = y - X * beta;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(K, K);
    for (int g = 0; g < G; ++g) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
      for (int i = g * per; i < (g + 1) * per; ++i) s += X.row(i).transpose() * u(i);
      meat += s * s.transpose();
    }
    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(K, K));
    const double corr = double(G) / (G - 1) * double(N - 1) / (N - K);
    const Eigen::VectorXd se = (corr * xtx_inv * meat * xtx_inv).diagonal().cwiseSqrt();
    const double diff = std::abs(se(1) - r.se.at("x"));
    return expect(diff < 1e-10, "sandwich mismatch " + format_double(diff));
  });

  runner.check("fe-demeaning-identity", [&] {
    Rng rng(opt.seed + 8);
    std::vector<PanelObservation> panel;
    for (int i = 0; i < 40; ++i) {
      PanelObservation obs;
      obs.country = "C" + std::to_string(i % 20);
      obs.cluster_id = obs.country;
      obs.period_start = i / 20;
      obs.covariates["x"] = rng.normal();
      obs.growth = 0.1 + 0.4 * obs.covariates["x"] + 0.3 * obs.period_start + 0.1 * rng.normal();
      panel.push_back(obs);
    }
    RegressionSpec spec;
    spec.regressors = {"x"};
    const RegressionResult r = ols_fe(panel, spec);

    // Demean y and x within each period, regress without intercept.
    double means_y[2] = {0, 0}, means_x[2] = {0, 0};
    int counts[2] = {0, 0};
    for (const auto& obs : panel) {
      means_y[obs.period_start] += obs.growth;
      means_x[obs.period_start] += obs.covariates.at("x");
      ++counts[obs.period_start];
    }
    for (int t = 0; t < 2; ++t) {
      means_y[t] /= counts[t];
      means_x[t] /= counts[t];
    }
    double num = 0, den = 0;
    for (const auto& obs : panel) {
      const double dx = obs.covariates.at("x") - means_x[obs.period_start];
      const double dy = obs.growth - means_y[obs.period_start];
      num += dx * dy;
      den += dx * dx;
    }
    const double diff = std::abs(num / den - r.coefficients.at("x"));
    return expect(diff < 1e-10, "demeaned slope mismatch " + format_double(diff));
  });

  runner.check("pci-service-shift", [&] {
    // Constant shift on top of a year effect: the dummy must recover exactly 1.
    std::vector<PciPanelRow> rows;
    for (int year = 2000; year < 2004; ++year)
      for (int j = 0; j < 8; ++j)
        rows.push_back({year, "P" + std::to_string(j),
                        0.05 * (year - 2000) + (j >= 5 ? 1.0 : 0.0), j >= 5});
    const RegressionResult r = pci_service_regression(rows);
    const double diff = std::abs(r.coefficients.at("service_dummy") - 1.0);
    return expect(diff < 1e-10, "injected shift drift " + format_double(diff));
  });

  runner.check("pipeline-determinism", [&] {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "ecomplex_selftest";
    fs::remove_all(base);
    std::string manifests[2];
    for (int run = 0; run < 2; ++run) {
      PipelineConfig config;
      config.fixture = "triangular";
      config.metrics = {"eci", "mfcm"};
      config.output_dir = (base / ("run" + std::to_string(run))).string();
      run_pipeline(config);
      manifests[run] = slurp_file(config.output_dir + "/manifest.json");
    }
    const bool equal = manifests[0] == manifests[1];
    fs::remove_all(base);
    return expect(equal, "manifests differ between runs");
  });

  return runner.failures();
}

}  // namespace ecomplex
