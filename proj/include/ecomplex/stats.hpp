#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ecomplex/score.hpp"

namespace ecomplex {

enum class RankDirection { descending, ascending };

/// Ranks with rank 1 = best; tied values carry the average of their
/// positions, so ranks always sum to n(n+1)/2.
struct Ranking {
  std::vector<std::string> labels;
  Eigen::VectorXd ranks;
  std::string source_metric;
  int year = 0;
};

/// Fractional (average) ranks of v in ascending order: smallest value gets
/// rank 1, ties share the mean of the positions they occupy.
template <typename Derived>
Eigen::VectorXd average_ranks(const Eigen::DenseBase<Derived>& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v(order[j + 1]) == v(order[i])) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks(order[k]) = shared;
    i = j + 1;
  }
  return ranks;
}

template <typename DA, typename DB>
double pearson(const Eigen::DenseBase<DA>& a, const Eigen::DenseBase<DB>& b) {
  const auto da = a.derived().array() - a.derived().template cast<double>().mean();
  const auto db = b.derived().array() - b.derived().template cast<double>().mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (denom == 0) return 0.0;
  return (da * db).sum() / denom;
}

Ranking rank_scores(const ScoreVector& scores,
                    RankDirection direction = RankDirection::descending);

/// Tie-safe Spearman correlation: the shared labels are re-ranked and their
/// rank vectors fed to Pearson. Throws insufficient_overlap when fewer than
/// 3 labels are shared.
double spearman(const Ranking& a, const Ranking& b);

struct YearCorrelation {
  int year = 0;
  double rho = 0.0;
  int n = 0;
};

/// Per-year Spearman correlation of two score series over their common
/// years. Throws no_common_years.
std::vector<YearCorrelation> yearly_rank_correlation(
    const std::map<int, ScoreVector>& series_a, const std::map<int, ScoreVector>& series_b,
    RankDirection direction = RankDirection::descending);

/// Tukey five-number summary with the 3/2-IQR outlier fences.
struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::vector<std::string> outliers;
};

/// Quartiles by Tukey hinges (median of each half, median excluded when n is
/// odd). Requires n >= 4 (too_few_points otherwise).
BoxStats box_stats(const ScoreVector& scores);

}  // namespace ecomplex
