#include "ecomplex/score.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ecomplex {

void ScoreVector::validate() const {
  if (values.size() == 0) fail(Errc::invalid_argument, "score vector '" + metric + "' is empty");
  if (static_cast<Eigen::Index>(labels.size()) != values.size())
    fail(Errc::invalid_argument, "score vector '" + metric + "' label/value size mismatch");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (static_cast<Eigen::Index>(seen.size()) != values.size())
    fail(Errc::invalid_argument, "score vector '" + metric + "' has duplicate labels");
  if (!values.allFinite())
    fail(Errc::invalid_argument, "score vector '" + metric + "' has non-finite values");
}

double ScoreVector::at(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) fail(Errc::invalid_argument, "label not found: " + label);
  return values(it - labels.begin());
}

bool ScoreVector::contains(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

}  // namespace ecomplex
