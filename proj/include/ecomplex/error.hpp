#pragma once

#include <stdexcept>
#include <string>

namespace ecomplex {

enum class Errc {
  malformed_row,
  negative_value,
  empty_input,
  no_data_for_year,
  missing_period,
  zero_marginal,
  missing_kind,
  empty_after_prune,
  degenerate_spectrum,
  complex_eigenvalue,
  singular_update,
  insufficient_overlap,
  no_common_years,
  too_few_points,
  rank_deficient,
  too_few_clusters,
  unknown_regressor,
  invalid_argument,
  io_error,
  internal,
};

const char* to_string(Errc code);

/// Library-wide exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace ecomplex
