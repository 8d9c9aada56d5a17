#include "ecomplex/fitness.hpp"

#include <cmath>
#include <limits>

namespace ecomplex {

namespace {

// Neumaier-compensated sum; keeps the N_c - c_i accumulations accurate when
// the iterates crowd the boundary.
double compensated_sum(const Eigen::VectorXd& v) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

struct TrajectoryRecorder {
  std::vector<TrajectoryPoint> points;

  void record(int iteration, const Eigen::VectorXd& c, double residual) {
    if (iteration <= 100 || iteration % 100 == 0)
      points.push_back({iteration, c.minCoeff(), c.maxCoeff(), residual});
  }
  void finalize(int iteration, const Eigen::VectorXd& c, double residual) {
    if (points.empty() || points.back().iteration != iteration)
      points.push_back({iteration, c.minCoeff(), c.maxCoeff(), residual});
  }
};

ScoreVector labeled(ScoreKind kind, const std::vector<std::string>& labels, Eigen::VectorXd v,
                    const std::string& metric) {
  ScoreVector s;
  s.kind = kind;
  s.labels = labels;
  s.values = std::move(v);
  s.metric = metric;
  s.validate();
  return s;
}

FixedPointResult iterate(const IncidenceMatrix& m, FitnessMethod method,
                         const FitnessOptions& opt) {
  if (opt.tol <= 0 || opt.zero_floor <= 0 || opt.max_iter < 1 || opt.boundary_margin <= 0 ||
      opt.boundary_margin >= 1)
    fail(Errc::invalid_argument, "fitness options out of range");
  m.validate();

  const Eigen::MatrixXd& mat = m.bits;
  const Eigen::Index n_c = mat.rows();
  const Eigen::Index n_p = mat.cols();
  const double country_count = static_cast<double>(n_c);

  Eigen::VectorXd c = Eigen::VectorXd::Ones(n_c);
  Eigen::VectorXd p = Eigen::VectorXd::Ones(n_p);

  TrajectoryRecorder recorder;
  FitnessVerdict verdict = FitnessVerdict::max_iterations;
  double residual = std::numeric_limits<double>::infinity();
  int iteration = 0;

  // Streak counters behind the pathological-trajectory verdicts: the minimum
  // strictly falling below the floor (fcm) or the maximum strictly climbing
  // inside the boundary margin (mfcm) for 100 consecutive iterations.
  int zero_streak = 0, drift_streak = 0;
  double prev_min = c.minCoeff(), prev_max = c.maxCoeff();

  Eigen::VectorXd weight(n_c), denom(n_p);
  while (iteration < opt.max_iter) {
    ++iteration;

    Eigen::VectorXd c_next = mat * p;
    c_next *= country_count / compensated_sum(c_next);

    if (method == FitnessMethod::fcm) {
      weight = c_next.cwiseInverse();
    } else {
      weight = (country_count - c_next.array()).matrix();
    }
    for (Eigen::Index j = 0; j < n_p; ++j) {
      denom(j) = compensated_sum(mat.col(j).cwiseProduct(weight));
      if (denom(j) <= 0)
        fail(Errc::singular_update, "product " + m.products[j] + " denominator " +
                                        std::to_string(denom(j)) + " at iteration " +
                                        std::to_string(iteration));
    }
    Eigen::VectorXd p_next = denom.cwiseInverse();
    p_next *= static_cast<double>(n_p) / compensated_sum(p_next);

    residual = std::max((c_next - c).cwiseAbs().maxCoeff(), (p_next - p).cwiseAbs().maxCoeff());
    c = std::move(c_next);
    p = std::move(p_next);

    if (c.minCoeff() <= 0 || p.minCoeff() <= 0)
      fail(Errc::internal, "nonpositive intermediate score at iteration " +
                               std::to_string(iteration));

    const double cur_min = c.minCoeff();
    const double cur_max = c.maxCoeff();
    recorder.record(iteration, c, residual);

    zero_streak = (cur_min < prev_min) ? zero_streak + 1 : 0;
    drift_streak =
        (cur_max > prev_max && cur_max > (1.0 - opt.boundary_margin) * country_count)
            ? drift_streak + 1
            : 0;
    prev_min = cur_min;
    prev_max = cur_max;

    if (method == FitnessMethod::fcm && cur_min < opt.zero_floor && zero_streak >= 100) {
      verdict = FitnessVerdict::zero_convergence;
      break;
    }
    if (method == FitnessMethod::mfcm && drift_streak >= 100) {
      verdict = FitnessVerdict::boundary_drift;
      break;
    }
    if (residual < opt.tol) {
      verdict = FitnessVerdict::converged;
      if (method == FitnessMethod::mfcm) {
        // Interior steady-state bounds; a residual-converged point outside
        // them is boundary drift, not a fixed point.
        if (!(cur_min > 0.0 && cur_max < country_count))
          verdict = FitnessVerdict::boundary_drift;
      }
      break;
    }
  }
  recorder.finalize(iteration, c, residual);

  FixedPointResult result;
  result.country_scores = labeled(ScoreKind::country, m.countries, std::move(c), "fitness");
  result.product_scores =
      labeled(ScoreKind::product, m.products, std::move(p), "product_complexity");
  result.iterations = iteration;
  result.residual = residual;
  result.verdict = verdict;
  result.trajectory = std::move(recorder.points);
  return result;
}

}  // namespace

const char* to_string(FitnessVerdict v) {
  switch (v) {
    case FitnessVerdict::converged: return "converged";
    case FitnessVerdict::zero_convergence: return "zero_convergence";
    case FitnessVerdict::boundary_drift: return "boundary_drift";
    case FitnessVerdict::max_iterations: return "max_iterations";
  }
  return "unknown";
}

const char* to_string(FitnessMethod m) {
  return m == FitnessMethod::fcm ? "fcm" : "mfcm";
}

FixedPointResult fcm(const IncidenceMatrix& m, const FitnessOptions& opt) {
  return iterate(m, FitnessMethod::fcm, opt);
}

FixedPointResult mfcm(const IncidenceMatrix& m, const FitnessOptions& opt) {
  return iterate(m, FitnessMethod::mfcm, opt);
}

TaylorComparison taylor_consistency(double c, int n_c) {
  if (n_c <= 0 || c <= 0 || c >= 2.0 * n_c)
    fail(Errc::invalid_argument, "taylor_consistency requires 0 < c < 2 n_c");
  const double n = static_cast<double>(n_c);
  TaylorComparison out;
  out.exact = 1.0 / c;
  out.approx = 4.0 / (n * n) * (n - c);
  const double delta = 2.0 * c / n - 1.0;
  out.rel_err = std::abs(1.0 / (1.0 + delta) - (1.0 - delta));
  return out;
}

}  // namespace ecomplex
