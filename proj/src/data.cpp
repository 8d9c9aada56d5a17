#include "ecomplex/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "ecomplex/io.hpp"

namespace ecomplex {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_int(const std::string& s, int& out) {
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

bool parse_double(const std::string& s, double& out) {
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, out);
  return ec == std::errc() && ptr == last && !s.empty() && std::isfinite(out);
}

}  // namespace

std::vector<int> TradeTable::years() const {
  std::set<int> ys;
  for (const auto& r : records) ys.insert(r.year);
  return {ys.begin(), ys.end()};
}

ParseResult parse_trade_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::empty_input, "trade CSV is empty");
  strip_cr(line);
  if (line != "year,country,product,value")
    fail(Errc::malformed_row, "line 1: expected header year,country,product,value");

  std::map<std::tuple<int, std::string, std::string>, double> agg;
  std::size_t duplicates = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = "line " + std::to_string(lineno);
    if (fields.size() != 4) fail(Errc::malformed_row, where + ": expected 4 fields");
    int year = 0;
    double value = 0.0;
    if (!parse_int(fields[0], year)) fail(Errc::malformed_row, where + ": bad year");
    if (year < 1900 || year > 2100) fail(Errc::malformed_row, where + ": year out of range");
    if (fields[1].empty() || fields[2].empty())
      fail(Errc::malformed_row, where + ": empty country or product");
    if (!parse_double(fields[3], value)) fail(Errc::malformed_row, where + ": bad value");
    if (value < 0) fail(Errc::negative_value, where + ": value " + fields[3]);
    auto [it, inserted] = agg.emplace(std::make_tuple(year, fields[1], fields[2]), value);
    if (!inserted) {
      it->second += value;
      ++duplicates;
    }
  }
  if (agg.empty()) fail(Errc::empty_input, "trade CSV has no data rows");

  ParseResult result;
  result.duplicates_summed = duplicates;
  result.table.records.reserve(agg.size());
  for (const auto& [key, value] : agg)
    result.table.records.push_back(
        {std::get<0>(key), std::get<1>(key), std::get<2>(key), value});
  return result;
}

void write_trade_csv(std::ostream& out, const TradeTable& table) {
  out << "year,country,product,value\n";
  for (const auto& r : table.records)
    out << r.year << ',' << r.country << ',' << r.product << ','
        << format_double_exact(r.value) << '\n';
}

void ExportMatrix::validate() const {
  if (values.rows() == 0 || values.cols() == 0)
    fail(Errc::invalid_argument, "export matrix is empty");
  if (static_cast<Eigen::Index>(countries.size()) != values.rows() ||
      static_cast<Eigen::Index>(products.size()) != values.cols() ||
      product_kind.size() != products.size())
    fail(Errc::invalid_argument, "export matrix label size mismatch");
  if ((values.array() < 0).any())
    fail(Errc::invalid_argument, "export matrix has negative entries");
  if ((values.rowwise().sum().array() <= 0).any())
    fail(Errc::zero_marginal, "export matrix has a zero row total");
  if ((values.colwise().sum().array() <= 0).any())
    fail(Errc::zero_marginal, "export matrix has a zero column total");
}

ExportMatrix build_export_matrix(const TradeTable& table, int year, const KindMap& kinds,
                                 MatrixBuildReport* report) {
  std::set<std::string> country_set, product_set;
  for (const auto& r : table.records) {
    if (r.year != year) continue;
    country_set.insert(r.country);
    product_set.insert(r.product);
  }
  if (country_set.empty()) fail(Errc::no_data_for_year, "no records for year " + std::to_string(year));

  std::vector<std::string> countries(country_set.begin(), country_set.end());
  std::vector<std::string> products(product_set.begin(), product_set.end());
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(countries.size(), products.size());
  auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
    return std::lower_bound(v.begin(), v.end(), s) - v.begin();
  };
  for (const auto& r : table.records) {
    if (r.year != year) continue;
    values(index_of(countries, r.country), index_of(products, r.product)) += r.value;
  }

  // Remove zero-total rows/columns until a fixed point. Zero-sum removal
  // converges in one pass for nonnegative data, but the loop keeps the
  // invariant airtight.
  std::vector<std::string> removed_countries, removed_products;
  bool changed = true;
  while (changed && values.size() > 0) {
    changed = false;
    const Eigen::VectorXd row_sums = values.rowwise().sum();
    const Eigen::VectorXd col_sums = values.colwise().sum();
    std::vector<Eigen::Index> keep_rows, keep_cols;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (row_sums(i) > 0)
        keep_rows.push_back(i);
      else
        removed_countries.push_back(countries[i]);
    }
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (col_sums(j) > 0)
        keep_cols.push_back(j);
      else
        removed_products.push_back(products[j]);
    }
    if (keep_rows.size() != static_cast<std::size_t>(values.rows()) ||
        keep_cols.size() != static_cast<std::size_t>(values.cols())) {
      changed = true;
      Eigen::MatrixXd next(keep_rows.size(), keep_cols.size());
      std::vector<std::string> next_countries, next_products;
      for (std::size_t a = 0; a < keep_rows.size(); ++a) {
        next_countries.push_back(countries[keep_rows[a]]);
        for (std::size_t b = 0; b < keep_cols.size(); ++b)
          next(a, b) = values(keep_rows[a], keep_cols[b]);
      }
      for (std::size_t b = 0; b < keep_cols.size(); ++b)
        next_products.push_back(products[keep_cols[b]]);
      values = std::move(next);
      countries = std::move(next_countries);
      products = std::move(next_products);
    }
  }
  if (values.size() == 0)
    fail(Errc::no_data_for_year, "no positive exports for year " + std::to_string(year));

  ExportMatrix ex;
  ex.year = year;
  ex.countries = std::move(countries);
  ex.products = std::move(products);
  ex.values = std::move(values);
  ex.product_kind.reserve(ex.products.size());
  for (const auto& p : ex.products) {
    auto it = kinds.find(p);
    ex.product_kind.push_back(it == kinds.end() ? ProductKind::good : it->second);
  }
  if (report) {
    std::sort(removed_countries.begin(), removed_countries.end());
    std::sort(removed_products.begin(), removed_products.end());
    report->removed_countries = std::move(removed_countries);
    report->removed_products = std::move(removed_products);
  }
  ex.validate();
  return ex;
}

bool is_natural_resource_code(const std::string& product) {
  if (product.empty()) return false;
  if (product[0] >= '0' && product[0] <= '4') return true;
  return product.size() >= 2 && product[0] == '6' && product[1] == '8';
}

double nr_export_increase(const TradeTable& table, double gdp_initial,
                          const std::string& country, int t, int horizon) {
  if (gdp_initial <= 0) fail(Errc::invalid_argument, "gdp_initial must be positive");
  bool seen_t = false, seen_h = false;
  double nr_t = 0.0, nr_h = 0.0;
  for (const auto& r : table.records) {
    if (r.country != country) continue;
    if (r.year == t) {
      seen_t = true;
      if (is_natural_resource_code(r.product)) nr_t += r.value;
    } else if (r.year == t + horizon) {
      seen_h = true;
      if (is_natural_resource_code(r.product)) nr_h += r.value;
    }
  }
  if (!seen_t)
    fail(Errc::missing_period, country + " has no records in " + std::to_string(t));
  if (!seen_h)
    fail(Errc::missing_period, country + " has no records in " + std::to_string(t + horizon));
  return (nr_h - nr_t) / gdp_initial;
}

PanelBuild align_panel(const SeriesMap& gdp,
                       const std::map<std::string, SeriesMap>& covariates,
                       const std::vector<std::pair<int, int>>& periods) {
  if (periods.empty()) fail(Errc::invalid_argument, "periods must be nonempty");
  PanelBuild build;
  for (const auto& [start, end] : periods) {
    std::set<std::string> candidates;
    for (const auto& [key, value] : gdp)
      if (key.second == start || key.second == end) candidates.insert(key.first);
    for (const auto& country : candidates) {
      const auto g0 = gdp.find({country, start});
      const auto g1 = gdp.find({country, end});
      if (g0 == gdp.end() || g1 == gdp.end()) {
        ++build.exclusions["missing endpoint"];
        continue;
      }
      if (g0->second <= 0 || g1->second <= 0) {
        ++build.exclusions["nonpositive gdp"];
        continue;
      }
      PanelObservation obs;
      obs.country = country;
      obs.cluster_id = country;
      obs.period_start = start;
      obs.growth = std::log(g1->second / g0->second);
      obs.covariates["log_initial_gdp"] = std::log(g0->second);
      bool complete = true;
      for (const auto& [name, series] : covariates) {
        const auto it = series.find({country, start});
        if (it == series.end() || !std::isfinite(it->second)) {
          ++build.exclusions["missing covariate:" + name];
          complete = false;
          break;
        }
        obs.covariates[name] = it->second;
      }
      if (complete) build.observations.push_back(std::move(obs));
    }
  }
  return build;
}

}  // namespace ecomplex
