#include "ecomplex/rca.hpp"

#include <algorithm>

namespace ecomplex {

namespace {

void check_marginals(const Eigen::MatrixXd& e, const std::vector<std::string>& countries,
                     const std::vector<std::string>& products) {
  const Eigen::VectorXd rows = e.rowwise().sum();
  const Eigen::VectorXd cols = e.colwise().sum();
  for (Eigen::Index i = 0; i < rows.size(); ++i)
    if (rows(i) <= 0) fail(Errc::zero_marginal, "country " + countries[i] + " has zero exports");
  for (Eigen::Index j = 0; j < cols.size(); ++j)
    if (cols(j) <= 0) fail(Errc::zero_marginal, "product " + products[j] + " has zero exports");
}

}  // namespace

void IncidenceMatrix::validate() const {
  if (bits.rows() == 0 || bits.cols() == 0)
    fail(Errc::invalid_argument, "incidence matrix is empty");
  if (static_cast<Eigen::Index>(countries.size()) != bits.rows() ||
      static_cast<Eigen::Index>(products.size()) != bits.cols())
    fail(Errc::invalid_argument, "incidence matrix label size mismatch");
  if (((bits.array() != 0.0) && (bits.array() != 1.0)).any())
    fail(Errc::invalid_argument, "incidence matrix entries must be 0 or 1");
  if ((bits.rowwise().sum().array() < 1).any() || (bits.colwise().sum().array() < 1).any())
    fail(Errc::invalid_argument, "incidence matrix has an empty row or column");
}

RcaMatrix rca(const ExportMatrix& ex) {
  check_marginals(ex.values, ex.countries, ex.products);
  RcaMatrix r;
  r.countries = ex.countries;
  r.products = ex.products;
  r.product_kind = ex.product_kind;
  r.variant = RcaVariant::joint;
  r.values = rca_values(ex.values);
  return r;
}

RcaMatrix concatenated_rca(const ExportMatrix& ex) {
  std::vector<Eigen::Index> goods, services;
  for (Eigen::Index j = 0; j < ex.n_products(); ++j)
    (ex.product_kind[j] == ProductKind::good ? goods : services).push_back(j);
  if (goods.empty()) fail(Errc::missing_kind, "no goods in export matrix");
  if (services.empty()) fail(Errc::missing_kind, "no services in export matrix");

  RcaMatrix r;
  r.countries = ex.countries;
  r.products = ex.products;
  r.product_kind = ex.product_kind;
  r.variant = RcaVariant::concatenated;
  r.values.resize(ex.n_countries(), ex.n_products());

  for (const auto* block : {&goods, &services}) {
    Eigen::MatrixXd sub(ex.n_countries(), block->size());
    std::vector<std::string> sub_products;
    for (std::size_t b = 0; b < block->size(); ++b) {
      sub.col(b) = ex.values.col((*block)[b]);
      sub_products.push_back(ex.products[(*block)[b]]);
    }
    check_marginals(sub, ex.countries, sub_products);
    const Eigen::MatrixXd sub_rca = rca_values(sub);
    for (std::size_t b = 0; b < block->size(); ++b) r.values.col((*block)[b]) = sub_rca.col(b);
  }
  return r;
}

IncidenceMatrix binarize(const RcaMatrix& r, double threshold, bool strict,
                         PruneReport* report) {
  if (threshold <= 0) fail(Errc::invalid_argument, "threshold must be positive");

  IncidenceMatrix m;
  m.threshold = threshold;
  m.countries = r.countries;
  m.products = r.products;
  m.product_kind = r.product_kind;
  if (strict)
    m.bits = (r.values.array() > threshold).cast<double>();
  else
    m.bits = (r.values.array() >= threshold).cast<double>();

  std::vector<std::string> removed_countries, removed_products;
  int passes = 0;
  bool changed = true;
  while (changed && m.bits.size() > 0) {
    changed = false;
    ++passes;
    const Eigen::VectorXd row_sums = m.bits.rowwise().sum();
    const Eigen::VectorXd col_sums = m.bits.colwise().sum();
    std::vector<Eigen::Index> keep_rows, keep_cols;
    for (Eigen::Index i = 0; i < m.bits.rows(); ++i) {
      if (row_sums(i) > 0)
        keep_rows.push_back(i);
      else
        removed_countries.push_back(m.countries[i]);
    }
    for (Eigen::Index j = 0; j < m.bits.cols(); ++j) {
      if (col_sums(j) > 0)
        keep_cols.push_back(j);
      else
        removed_products.push_back(m.products[j]);
    }
    if (keep_rows.size() != static_cast<std::size_t>(m.bits.rows()) ||
        keep_cols.size() != static_cast<std::size_t>(m.bits.cols())) {
      changed = true;
      Eigen::MatrixXd next(keep_rows.size(), keep_cols.size());
      std::vector<std::string> next_countries, next_products;
      std::vector<ProductKind> next_kinds;
      for (std::size_t a = 0; a < keep_rows.size(); ++a) {
        next_countries.push_back(m.countries[keep_rows[a]]);
        for (std::size_t b = 0; b < keep_cols.size(); ++b)
          next(a, b) = m.bits(keep_rows[a], keep_cols[b]);
      }
      for (std::size_t b = 0; b < keep_cols.size(); ++b) {
        next_products.push_back(m.products[keep_cols[b]]);
        next_kinds.push_back(m.product_kind[keep_cols[b]]);
      }
      m.bits = std::move(next);
      m.countries = std::move(next_countries);
      m.products = std::move(next_products);
      m.product_kind = std::move(next_kinds);
    }
  }
  if (m.bits.size() == 0) fail(Errc::empty_after_prune, "no links at threshold");
  if (report) {
    std::sort(removed_countries.begin(), removed_countries.end());
    std::sort(removed_products.begin(), removed_products.end());
    report->removed_countries = std::move(removed_countries);
    report->removed_products = std::move(removed_products);
    report->passes = passes;
  }
  m.validate();
  return m;
}

}  // namespace ecomplex
