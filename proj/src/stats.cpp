#include "ecomplex/stats.hpp"

#include <algorithm>
#include <set>

namespace ecomplex {

Ranking rank_scores(const ScoreVector& scores, RankDirection direction) {
  scores.validate();
  Ranking r;
  r.labels = scores.labels;
  r.source_metric = scores.metric;
  r.ranks = direction == RankDirection::ascending
                ? average_ranks(scores.values)
                : average_ranks((-scores.values).eval());
  return r;
}

double spearman(const Ranking& a, const Ranking& b) {
  std::vector<double> ra, rb;
  std::vector<std::string> shared;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
    if (it == b.labels.end()) continue;
    shared.push_back(a.labels[i]);
    ra.push_back(a.ranks(static_cast<Eigen::Index>(i)));
    rb.push_back(b.ranks(it - b.labels.begin()));
  }
  if (shared.size() < 3)
    fail(Errc::insufficient_overlap,
         "only " + std::to_string(shared.size()) + " shared labels");
  const Eigen::Map<const Eigen::VectorXd> va(ra.data(), ra.size());
  const Eigen::Map<const Eigen::VectorXd> vb(rb.data(), rb.size());
  // Re-rank the shared subset so both sides are valid rankings again.
  return pearson(average_ranks(va), average_ranks(vb));
}

std::vector<YearCorrelation> yearly_rank_correlation(
    const std::map<int, ScoreVector>& series_a, const std::map<int, ScoreVector>& series_b,
    RankDirection direction) {
  std::vector<YearCorrelation> rows;
  for (const auto& [year, a] : series_a) {
    const auto it = series_b.find(year);
    if (it == series_b.end()) continue;
    const Ranking ra = rank_scores(a, direction);
    const Ranking rb = rank_scores(it->second, direction);
    std::set<std::string> la(ra.labels.begin(), ra.labels.end());
    int n = 0;
    for (const auto& l : rb.labels) n += la.count(l);
    rows.push_back({year, spearman(ra, rb), n});
  }
  if (rows.empty()) fail(Errc::no_common_years, "score series share no years");
  return rows;
}

namespace {

double median_of(const std::vector<double>& sorted, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  const std::size_t mid = lo + n / 2;
  return n % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace

BoxStats box_stats(const ScoreVector& scores) {
  scores.validate();
  const std::size_t n = static_cast<std::size_t>(scores.size());
  if (n < 4) fail(Errc::too_few_points, "box stats need at least 4 points, got " + std::to_string(n));

  std::vector<double> sorted(scores.values.data(), scores.values.data() + n);
  std::sort(sorted.begin(), sorted.end());

  BoxStats s;
  s.median = median_of(sorted, 0, n);
  // Tukey hinges: halves exclude the middle element when n is odd.
  s.q1 = median_of(sorted, 0, n / 2);
  s.q3 = median_of(sorted, (n + 1) / 2, n);
  s.iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * s.iqr;
  s.upper_fence = s.q3 + 1.5 * s.iqr;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = scores.values(static_cast<Eigen::Index>(i));
    if (v < s.lower_fence || v > s.upper_fence) s.outliers.push_back(scores.labels[i]);
  }
  std::sort(s.outliers.begin(), s.outliers.end());
  return s;
}

}  // namespace ecomplex
