#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ecomplex/error.hpp"

namespace ecomplex {

enum class ScoreKind { country, product };

/// Labeled real-valued scores for countries or products.
struct ScoreVector {
  ScoreKind kind = ScoreKind::country;
  std::vector<std::string> labels;
  Eigen::VectorXd values;
  std::string metric;

  Eigen::Index size() const { return values.size(); }

  // Throws invalid_argument unless labels are unique, sizes match,
  // values are finite and the vector is nonempty.
  void validate() const;

  double at(const std::string& label) const;
  bool contains(const std::string& label) const;
};

}  // namespace ecomplex
