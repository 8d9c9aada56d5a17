#pragma once

#include <Eigen/Dense>

#include "ecomplex/rca.hpp"
#include "ecomplex/score.hpp"

namespace ecomplex {

/// Row degree of M: number of products each country exports.
ScoreVector diversity(const IncidenceMatrix& m);

/// Column degree of M: number of countries exporting each product.
ScoreVector ubiquity(const IncidenceMatrix& m);

struct MrIterates {
  ScoreVector country;
  ScoreVector product;
};

/// n steps of the reflections map
///   c_{i,n} = (1/d_i) sum_j M_ij p_{j,n-1},
///   p_{j,n} = (1/u_j) sum_i M_ij c_{i,n-1},
/// from c_0 = d, p_0 = u. n = 0 returns the initial conditions. Raw iterates
/// alternate between even/odd profiles and collapse toward a constant; they
/// are exposed for diagnostics, the rankings come from eci/pci.
MrIterates mr_iterate(const IncidenceMatrix& m, int n);

enum class CouplingKind { country, product };

/// Country coupling C_{ii'} = sum_j M_ij M_i'j / (d_i u_j), or the product
/// analogue P_{jj'} = sum_i M_ij M_ij' / (d_i u_j). Note the product variant
/// divides by the ubiquity of the row product j, not j'; that asymmetry is
/// what makes both matrices row-stochastic.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> coupling_values(
    const Eigen::MatrixBase<Derived>& m, CouplingKind kind) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  const Vec d_inv = m.rowwise().sum().cwiseInverse();
  const Vec u_inv = m.colwise().sum().transpose().cwiseInverse();
  if (kind == CouplingKind::country)
    return d_inv.asDiagonal() * m * u_inv.asDiagonal() * m.transpose();
  return u_inv.asDiagonal() * m.transpose() * d_inv.asDiagonal() * m;
}

Eigen::MatrixXd coupling_matrix(const IncidenceMatrix& m, CouplingKind kind);

/// Second eigenpair of a coupling matrix, before standardization.
struct SpectralResult {
  double eigenvalue = 0.0;   // lambda_2, second largest modulus (largest is 1)
  ScoreVector eigenvector;   // unit-norm, pre-standardization
  double residual = 0.0;     // max-norm of A v - lambda v
  int orientation_sign = 1;  // sign applied to the standardized scores
};

struct ComplexityIndex {
  ScoreVector scores;  // mean 0, sample stdev 1, sign-oriented
  SpectralResult spectral;
};

/// ECI: standardized eigenvector of the second-largest-modulus eigenvalue of
/// the country coupling matrix, oriented to correlate nonnegatively with
/// diversity. Throws degenerate_spectrum when |lambda_2| is within tol of 1
/// or of |lambda_3|, and complex_eigenvalue when the selected eigenvalue has
/// imaginary part above tol.
ComplexityIndex eci(const IncidenceMatrix& m, double tol = 1e-9);

/// PCI: same construction on the product coupling matrix, oriented to
/// correlate nonpositively with ubiquity.
ComplexityIndex pci(const IncidenceMatrix& m, double tol = 1e-9);

}  // namespace ecomplex
