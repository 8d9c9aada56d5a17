#include "ecomplex/error.hpp"

namespace ecomplex {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::malformed_row: return "malformed_row";
    case Errc::negative_value: return "negative_value";
    case Errc::empty_input: return "empty_input";
    case Errc::no_data_for_year: return "no_data_for_year";
    case Errc::missing_period: return "missing_period";
    case Errc::zero_marginal: return "zero_marginal";
    case Errc::missing_kind: return "missing_kind";
    case Errc::empty_after_prune: return "empty_after_prune";
    case Errc::degenerate_spectrum: return "degenerate_spectrum";
    case Errc::complex_eigenvalue: return "complex_eigenvalue";
    case Errc::singular_update: return "singular_update";
    case Errc::insufficient_overlap: return "insufficient_overlap";
    case Errc::no_common_years: return "no_common_years";
    case Errc::too_few_points: return "too_few_points";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::too_few_clusters: return "too_few_clusters";
    case Errc::unknown_regressor: return "unknown_regressor";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io_error: return "io_error";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace ecomplex
