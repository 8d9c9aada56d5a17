#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ecomplex/error.hpp"

namespace ecomplex {

/// One aggregated export flow: country shipped `value` of `product` in `year`.
struct TradeRecord {
  int year = 0;
  std::string country;
  std::string product;
  double value = 0.0;
};

/// Aggregated long-format trade data. Records are sorted by
/// (year, country, product) and keys are unique.
struct TradeTable {
  std::vector<TradeRecord> records;
  std::string metadata;

  std::vector<int> years() const;
};

struct ParseResult {
  TradeTable table;
  std::size_t duplicates_summed = 0;
};

/// Parses CSV with header `year,country,product,value`. Rows sharing a
/// (year, country, product) key are summed; the number of collapsed rows is
/// reported. Throws malformed_row / negative_value with the 1-based line
/// number, or empty_input when there are no data rows.
ParseResult parse_trade_csv(std::istream& in);

/// Inverse of parse_trade_csv up to aggregation; rows emitted in sorted order.
void write_trade_csv(std::ostream& out, const TradeTable& table);

enum class ProductKind { good, service };

using KindMap = std::map<std::string, ProductKind>;

/// Dense country x product export matrix for one year. Invariant: every row
/// and column total is positive, and label vectors are sorted.
struct ExportMatrix {
  int year = 0;
  std::vector<std::string> countries;
  std::vector<std::string> products;
  Eigen::MatrixXd values;
  std::vector<ProductKind> product_kind;

  Eigen::Index n_countries() const { return values.rows(); }
  Eigen::Index n_products() const { return values.cols(); }
  void validate() const;
};

struct MatrixBuildReport {
  std::vector<std::string> removed_countries;
  std::vector<std::string> removed_products;
};

/// Builds the year's export matrix. Countries/products appear in sorted code
/// order; rows/columns whose total is zero are removed and reported. Kinds
/// default to `good` for products absent from `kinds`.
ExportMatrix build_export_matrix(const TradeTable& table, int year,
                                 const KindMap& kinds = {},
                                 MatrixBuildReport* report = nullptr);

/// SITC natural-resource test: section (first character) in {0,1,2,3,4} or
/// 2-digit prefix 68. Codes are treated as opaque strings; callers mixing in
/// non-SITC service codes should restrict the table to goods first.
bool is_natural_resource_code(const std::string& product);

/// (NR_{t+horizon} - NR_t) / gdp_initial, NR summed over natural-resource
/// products. Values are used as supplied; deflation is the caller's concern.
double nr_export_increase(const TradeTable& table, double gdp_initial,
                          const std::string& country, int t, int horizon);

/// (country, year) -> value.
using SeriesMap = std::map<std::pair<std::string, int>, double>;

/// One growth-regression observation: log GDP ratio over a period plus the
/// covariates measured at the period start.
struct PanelObservation {
  std::string country;
  int period_start = 0;
  double growth = 0.0;
  std::map<std::string, double> covariates;
  std::string cluster_id;
};

struct PanelBuild {
  std::vector<PanelObservation> observations;
  std::map<std::string, int> exclusions;  // reason -> count
};

/// Aligns GDP and covariate series into panel observations, one per
/// (country, period) with GDP at both endpoints and every covariate at the
/// start. growth = log(gdp_end / gdp_start). The covariate
/// `log_initial_gdp` is derived from the GDP series automatically.
/// Exclusions are counted by reason, never fatal.
PanelBuild align_panel(const SeriesMap& gdp,
                       const std::map<std::string, SeriesMap>& covariates,
                       const std::vector<std::pair<int, int>>& periods);

}  // namespace ecomplex
