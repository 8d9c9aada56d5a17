#include "ecomplex/reflections.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace ecomplex {

namespace {

ScoreVector make_scores(ScoreKind kind, const std::vector<std::string>& labels,
                        Eigen::VectorXd values, const std::string& metric) {
  ScoreVector s;
  s.kind = kind;
  s.labels = labels;
  s.values = std::move(values);
  s.metric = metric;
  s.validate();
  return s;
}

double sample_stdev(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

double pearson_raw(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (denom == 0) return 0.0;
  return (da * db).sum() / denom;
}

struct EigPick {
  double lambda = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
};

// Selects the second-largest-modulus eigenpair of a row-stochastic matrix and
// refines the eigenvector by one inverse-iteration step so the residual is at
// machine level regardless of the dense solver's path.
EigPick second_eigenpair(const Eigen::MatrixXd& a, double tol) {
  const Eigen::Index n = a.rows();
  if (n < 2) fail(Errc::degenerate_spectrum, "coupling matrix smaller than 2x2");

  Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) fail(Errc::internal, "eigensolver failed");
  const Eigen::VectorXcd lambdas = solver.eigenvalues();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return std::abs(lambdas(x)) > std::abs(lambdas(y));
  });

  const std::complex<double> lambda2 = lambdas(order[1]);
  if (std::abs(lambda2.imag()) > tol)
    fail(Errc::complex_eigenvalue,
         "second eigenvalue " + std::to_string(lambda2.real()) + " + " +
             std::to_string(lambda2.imag()) + "i");
  const double m2 = std::abs(lambda2);
  if (m2 >= 1.0 - tol)
    fail(Errc::degenerate_spectrum, "|lambda_2| = " + std::to_string(m2) + " is within tol of 1");
  if (n >= 3) {
    const double m3 = std::abs(lambdas(order[2]));
    if (m2 - m3 < tol)
      fail(Errc::degenerate_spectrum, "|lambda_2| and |lambda_3| within tol: " +
                                          std::to_string(m2) + " vs " + std::to_string(m3));
  }

  EigPick pick;
  pick.lambda = lambda2.real();
  Eigen::VectorXd v = solver.eigenvectors().col(order[1]).real();
  // Inverse iteration against a slightly shifted matrix tightens the residual
  // and makes the vector reproducible under permutations of the input.
  const Eigen::MatrixXd shifted =
      a - (pick.lambda + 1e-13) * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd refined = shifted.partialPivLu().solve(v);
  if (refined.allFinite() && refined.norm() > 0) v = refined / refined.norm();
  v /= v.norm();
  pick.vector = v;
  pick.residual = (a * v - pick.lambda * v).cwiseAbs().maxCoeff();
  if (pick.residual >= tol)
    fail(Errc::internal, "eigen residual " + std::to_string(pick.residual) + " exceeds tol");
  return pick;
}

ComplexityIndex complexity_index(const IncidenceMatrix& m, CouplingKind kind, double tol) {
  if (tol <= 0) fail(Errc::invalid_argument, "tol must be positive");
  m.validate();
  const Eigen::MatrixXd a = coupling_values(m.bits, kind);
  EigPick pick = second_eigenpair(a, tol);

  const bool country = kind == CouplingKind::country;
  const ScoreKind score_kind = country ? ScoreKind::country : ScoreKind::product;
  const auto& labels = country ? m.countries : m.products;

  Eigen::VectorXd standardized =
      (pick.vector.array() - pick.vector.mean()) / sample_stdev(pick.vector);

  // The eigenvector's sign is free; orient by correlation with the degree
  // profile (positive for countries, negative for products). Fall back to
  // making the largest-magnitude entry positive if the correlation vanishes.
  const Eigen::VectorXd degrees =
      country ? Eigen::VectorXd(m.bits.rowwise().sum()) : Eigen::VectorXd(m.bits.colwise().sum());
  const double corr = pearson_raw(standardized, degrees);
  int sign = 1;
  if (corr != 0.0) {
    sign = (country ? corr : -corr) >= 0 ? 1 : -1;
  } else {
    Eigen::Index imax = 0;
    standardized.cwiseAbs().maxCoeff(&imax);
    sign = standardized(imax) >= 0 ? 1 : -1;
  }
  standardized *= sign;

  ComplexityIndex out;
  out.scores = make_scores(score_kind, labels, std::move(standardized), country ? "eci" : "pci");
  out.spectral.eigenvalue = pick.lambda;
  out.spectral.residual = pick.residual;
  out.spectral.orientation_sign = sign;
  out.spectral.eigenvector =
      make_scores(score_kind, labels, std::move(pick.vector), country ? "eci_raw" : "pci_raw");
  return out;
}

}  // namespace

ScoreVector diversity(const IncidenceMatrix& m) {
  m.validate();
  return make_scores(ScoreKind::country, m.countries, m.bits.rowwise().sum(), "diversity");
}

ScoreVector ubiquity(const IncidenceMatrix& m) {
  m.validate();
  return make_scores(ScoreKind::product, m.products, m.bits.colwise().sum(), "ubiquity");
}

MrIterates mr_iterate(const IncidenceMatrix& m, int n) {
  if (n < 0) fail(Errc::invalid_argument, "iteration count must be nonnegative");
  m.validate();
  const Eigen::VectorXd d = m.bits.rowwise().sum();
  const Eigen::VectorXd u = m.bits.colwise().sum();
  Eigen::VectorXd c = d, p = u;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd c_next = (m.bits * p).cwiseQuotient(d);
    const Eigen::VectorXd p_next = (m.bits.transpose() * c).cwiseQuotient(u);
    c = c_next;
    p = p_next;
  }
  MrIterates out;
  out.country = make_scores(ScoreKind::country, m.countries, std::move(c), "mr_country");
  out.product = make_scores(ScoreKind::product, m.products, std::move(p), "mr_product");
  return out;
}

Eigen::MatrixXd coupling_matrix(const IncidenceMatrix& m, CouplingKind kind) {
  m.validate();
  return coupling_values(m.bits, kind);
}

ComplexityIndex eci(const IncidenceMatrix& m, double tol) {
  return complexity_index(m, CouplingKind::country, tol);
}

ComplexityIndex pci(const IncidenceMatrix& m, double tol) {
  return complexity_index(m, CouplingKind::product, tol);
}

}  // namespace ecomplex
