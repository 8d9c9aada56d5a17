#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ecomplex/data.hpp"

namespace ecomplex {

enum class RcaVariant { joint, concatenated };

struct RcaMatrix {
  std::vector<std::string> countries;
  std::vector<std::string> products;
  Eigen::MatrixXd values;
  RcaVariant variant = RcaVariant::joint;
  std::vector<ProductKind> product_kind;
};

/// Binary country x product incidence matrix. Entries are 0/1 doubles so the
/// downstream algebra stays expression-friendly; every row and column sum is
/// at least 1 after pruning.
struct IncidenceMatrix {
  std::vector<std::string> countries;
  std::vector<std::string> products;
  Eigen::MatrixXd bits;
  double threshold = 1.0;
  std::vector<ProductKind> product_kind;

  Eigen::Index n_countries() const { return bits.rows(); }
  Eigen::Index n_products() const { return bits.cols(); }
  void validate() const;
};

struct PruneReport {
  std::vector<std::string> removed_countries;
  std::vector<std::string> removed_products;
  int passes = 0;
};

/// Balassa index of an export block with positive marginals:
///   RCA_ij = (E_ij / sum_j E_ij) / (sum_i E_ij / sum_ij E_ij).
/// The caller guarantees positive row and column totals.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> rca_values(
    const Eigen::MatrixBase<Derived>& exports) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  const Mat e = exports;
  const Vec row_totals = e.rowwise().sum();
  const Vec col_totals = e.colwise().sum();
  const Scalar total = row_totals.sum();
  Mat shares = e.array().colwise() / row_totals.array();
  return shares.array().rowwise() / (col_totals.transpose().array() / total);
}

/// Eq. (1) applied to the whole matrix (goods and services share one
/// normalization). Throws zero_marginal if a row or column total vanishes.
RcaMatrix rca(const ExportMatrix& ex);

/// Separate Balassa normalization within the goods block and the services
/// block, concatenated back in the original column order. Throws missing_kind
/// when either block is empty.
RcaMatrix concatenated_rca(const ExportMatrix& ex);

/// Thresholds RCA into the incidence matrix (bit = RCA >= threshold, or
/// strict > when requested) and prunes zero rows/columns to a fixed point.
/// Throws empty_after_prune if nothing survives.
IncidenceMatrix binarize(const RcaMatrix& r, double threshold = 1.0, bool strict = false,
                         PruneReport* report = nullptr);

}  // namespace ecomplex
