#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ecomplex/data.hpp"
#include "ecomplex/econ.hpp"
#include "ecomplex/fitness.hpp"
#include "ecomplex/reflections.hpp"
#include "ecomplex/score.hpp"
#include "ecomplex/stats.hpp"

namespace ecomplex {

/// Fixed 12-significant-digit rendering; all emitted files use it so golden
/// outputs stay byte-stable.
std::string format_double(double x);

/// Shortest representation that parses back to the same double; used where
/// losslessness matters more than fixed width (trade-table serialization).
std::string format_double_exact(double x);

/// `label,value` rows sorted by value descending (ties by label).
void write_score_csv(std::ostream& out, const ScoreVector& scores);
ScoreVector read_score_csv(std::istream& in, ScoreKind kind, const std::string& metric);

void write_matrix_csv(std::ostream& out, const std::string& corner,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels, const Eigen::MatrixXd& m);

/// Header `country,year,value`; duplicate keys are an error.
SeriesMap read_series_csv(std::istream& in);

/// Header `product,kind` with kind in {good, service}.
KindMap read_kind_csv(std::istream& in);

/// One code per line (blank lines skipped).
std::vector<std::string> read_code_list(std::istream& in);

/// Lines `country` (all periods) or `country,year`.
std::vector<std::pair<std::string, int>> read_exclusion_list(std::istream& in);
constexpr int kAllYears = -1;

void write_correlation_csv(std::ostream& out, const std::vector<YearCorrelation>& rows);
void write_box_csv(std::ostream& out, const std::map<int, BoxStats>& by_year);
void write_ranking_csv(std::ostream& out, const std::map<int, Ranking>& by_year);

std::string fitness_result_json(const FixedPointResult& result, FitnessMethod method);
std::string spectral_json(const SpectralResult& spectral);
std::string regression_json(const RegressionResult& result);
std::string regression_csv(const RegressionResult& result, const std::vector<std::string>& rows);
std::string regression_text(const RegressionResult& result, const std::vector<std::string>& rows);

std::uint64_t fnv1a64(std::string_view data);

std::string slurp_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// Reads `path` and runs `parser` on its contents, prefixing parse errors
/// with the path so callers see file and line together.
template <typename Parser>
auto parse_file(const std::string& path, Parser&& parser) {
  std::istringstream in(slurp_file(path));
  try {
    return parser(in);
  } catch (const Error& e) {
    if (e.code() == Errc::io_error) throw;
    fail(e.code(), path + ": " + e.message());
  }
}

}  // namespace ecomplex
