#include "ecomplex/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

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

double parse_double_or_fail(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": bad number '" + s + "'");
  return v;
}

int parse_int_or_fail(const std::string& s, std::size_t lineno) {
  int v = 0;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_double_exact(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : format_double(x);
}

void write_score_csv(std::ostream& out, const ScoreVector& scores) {
  scores.validate();
  std::vector<Eigen::Index> order(scores.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (scores.values(a) != scores.values(b)) return scores.values(a) > scores.values(b);
    return scores.labels[a] < scores.labels[b];
  });
  out << "label,value\n";
  for (const Eigen::Index i : order)
    out << scores.labels[i] << ',' << format_double(scores.values(i)) << '\n';
}

ScoreVector read_score_csv(std::istream& in, ScoreKind kind, const std::string& metric) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::empty_input, "score CSV is empty");
  strip_cr(line);
  if (line != "label,value") fail(Errc::malformed_row, "line 1: expected header label,value");
  std::vector<std::string> labels;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": expected 2 fields");
    labels.push_back(fields[0]);
    values.push_back(parse_double_or_fail(fields[1], lineno));
  }
  if (labels.empty()) fail(Errc::empty_input, "score CSV has no data rows");
  ScoreVector s;
  s.kind = kind;
  s.metric = metric;
  s.labels = std::move(labels);
  s.values = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  s.validate();
  return s;
}

void write_matrix_csv(std::ostream& out, const std::string& corner,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels, const Eigen::MatrixXd& m) {
  out << corner;
  for (const auto& c : col_labels) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << row_labels[i];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

SeriesMap read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::empty_input, "series CSV is empty");
  strip_cr(line);
  if (line != "country,year,value")
    fail(Errc::malformed_row, "line 1: expected header country,year,value");
  SeriesMap series;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3 || fields[0].empty())
      fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": expected country,year,value");
    const int year = parse_int_or_fail(fields[1], lineno);
    const double value = parse_double_or_fail(fields[2], lineno);
    if (!series.emplace(std::make_pair(fields[0], year), value).second)
      fail(Errc::malformed_row,
           "line " + std::to_string(lineno) + ": duplicate key " + fields[0] + "/" + fields[1]);
  }
  return series;
}

KindMap read_kind_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::empty_input, "kind CSV is empty");
  strip_cr(line);
  if (line != "product,kind") fail(Errc::malformed_row, "line 1: expected header product,kind");
  KindMap kinds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2 || fields[0].empty())
      fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": expected product,kind");
    ProductKind kind;
    if (fields[1] == "good")
      kind = ProductKind::good;
    else if (fields[1] == "service")
      kind = ProductKind::service;
    else
      fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": kind must be good|service");
    kinds[fields[0]] = kind;
  }
  return kinds;
}

std::vector<std::string> read_code_list(std::istream& in) {
  std::vector<std::string> codes;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (!line.empty()) codes.push_back(line);
  }
  return codes;
}

std::vector<std::pair<std::string, int>> read_exclusion_list(std::istream& in) {
  std::vector<std::pair<std::string, int>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() == 1)
      out.emplace_back(fields[0], kAllYears);
    else if (fields.size() == 2)
      out.emplace_back(fields[0], parse_int_or_fail(fields[1], lineno));
    else
      fail(Errc::malformed_row, "line " + std::to_string(lineno) + ": expected country[,year]");
  }
  return out;
}

void write_correlation_csv(std::ostream& out, const std::vector<YearCorrelation>& rows) {
  out << "year,rho,n\n";
  for (const auto& r : rows) out << r.year << ',' << format_double(r.rho) << ',' << r.n << '\n';
}

void write_box_csv(std::ostream& out, const std::map<int, BoxStats>& by_year) {
  out << "year,median,q1,q3,iqr,lower_fence,upper_fence,outliers\n";
  for (const auto& [year, s] : by_year) {
    out << year << ',' << format_double(s.median) << ',' << format_double(s.q1) << ','
        << format_double(s.q3) << ',' << format_double(s.iqr) << ','
        << format_double(s.lower_fence) << ',' << format_double(s.upper_fence) << ',';
    for (std::size_t i = 0; i < s.outliers.size(); ++i)
      out << (i ? ";" : "") << s.outliers[i];
    out << '\n';
  }
}

void write_ranking_csv(std::ostream& out, const std::map<int, Ranking>& by_year) {
  out << "year,label,rank\n";
  for (const auto& [year, r] : by_year)
    for (std::size_t i = 0; i < r.labels.size(); ++i)
      out << year << ',' << r.labels[i] << ','
          << format_double(r.ranks(static_cast<Eigen::Index>(i))) << '\n';
}

namespace {

nlohmann::json score_json(const ScoreVector& s) {
  nlohmann::json obj = nlohmann::json::object();
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    obj[s.labels[i]] = s.values(static_cast<Eigen::Index>(i));
  return obj;
}

}  // namespace

std::string fitness_result_json(const FixedPointResult& result, FitnessMethod method) {
  nlohmann::json j;
  j["method"] = to_string(method);
  j["verdict"] = to_string(result.verdict);
  j["iterations"] = result.iterations;
  j["residual"] = result.residual;
  j["country_scores"] = score_json(result.country_scores);
  j["product_scores"] = score_json(result.product_scores);
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& pt : result.trajectory)
    traj.push_back({{"iteration", pt.iteration},
                    {"min_c", pt.min_c},
                    {"max_c", pt.max_c},
                    {"residual", pt.residual}});
  j["trajectory"] = std::move(traj);
  return j.dump(2) + "\n";
}

std::string spectral_json(const SpectralResult& spectral) {
  nlohmann::json j;
  j["eigenvalue"] = spectral.eigenvalue;
  j["residual"] = spectral.residual;
  j["orientation_sign"] = spectral.orientation_sign;
  j["eigenvector"] = score_json(spectral.eigenvector);
  return j.dump(2) + "\n";
}

std::string regression_json(const RegressionResult& result) {
  nlohmann::json j;
  j["coefficients"] = result.coefficients;
  j["se"] = result.se;
  j["t_stats"] = result.t_stats;
  j["p_values"] = result.p_values;
  j["star_codes"] = result.star_codes;
  j["r_squared"] = result.r_squared;
  j["n_obs"] = result.n_obs;
  j["n_clusters"] = result.n_clusters;
  j["df_resid"] = result.df_resid;
  j["fe_estimates"] = nlohmann::json::object();
  for (const auto& [period, v] : result.fe_estimates)
    j["fe_estimates"][std::to_string(period)] = v;
  j["info_criteria"] = {{"aic", result.info_criteria.aic},
                        {"bic", result.info_criteria.bic},
                        {"hq", result.info_criteria.hq}};
  j["se_type"] = result.n_clusters > 0 ? "clustered (G/(G-1)*(N-1)/(N-K))" : "ordinary";
  j["r_squared_type"] = "overall";
  return j.dump(2) + "\n";
}

std::string regression_csv(const RegressionResult& result, const std::vector<std::string>& rows) {
  std::ostringstream out;
  out << "term,coefficient,se,t,p,stars\n";
  std::vector<std::string> order = rows;
  order.push_back("const");
  for (const auto& name : order) {
    const auto it = result.coefficients.find(name);
    if (it == result.coefficients.end()) continue;
    out << name << ',' << format_double(it->second) << ',' << format_double(result.se.at(name))
        << ',' << format_double(result.t_stats.at(name)) << ','
        << format_double(result.p_values.at(name)) << ',' << result.star_codes.at(name) << '\n';
  }
  return out.str();
}

std::string regression_text(const RegressionResult& result, const std::vector<std::string>& rows) {
  std::ostringstream out;
  std::vector<std::string> order = rows;
  order.push_back("const");
  for (const auto& name : order) {
    const auto it = result.coefficients.find(name);
    if (it == result.coefficients.end()) continue;
    char coef[64], se[64];
    std::snprintf(coef, sizeof coef, "%.3f", it->second);
    std::snprintf(se, sizeof se, "(%.3f)", result.se.at(name));
    out << name << "  " << coef << result.star_codes.at(name) << "\n";
    out << std::string(name.size(), ' ') << "  " << se << "\n";
  }
  char r2[64];
  std::snprintf(r2, sizeof r2, "%.3f", result.r_squared);
  out << "Observations  " << result.n_obs << "\n";
  out << "R^2  " << r2 << "\n";
  out << "Period FE  " << (result.fe_estimates.empty() ? "No" : "Yes") << "\n";
  out << (result.n_clusters > 0
              ? "Standard errors clustered by cross-section in parentheses."
              : "Ordinary standard errors in parentheses.")
      << " ***p<0.01, **p<0.05, *p<0.1\n";
  return out.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : data) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  out << contents;
  if (!out) fail(Errc::io_error, "short write to " + path);
}

}  // namespace ecomplex
