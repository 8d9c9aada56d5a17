#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ecomplex/fitness.hpp"
#include "ecomplex/rca.hpp"

namespace ecomplex {

/// Everything the per-year pipeline needs. Paths left empty disable the
/// corresponding stage; `fixture` ("triangular" or "nested") replaces the
/// trade CSV with a bundled incidence matrix.
struct PipelineConfig {
  std::string trade_csv;
  std::string fixture;
  std::string product_kinds_csv;
  std::string gdp_csv;
  std::map<std::string, std::string> covariate_csvs;  // covariate name -> path
  std::string allow_list_path;
  std::string exclusion_list_path;

  std::vector<int> years;                   // empty -> every year in the data
  std::set<std::string> metrics{"eci", "mfcm"};  // subset of {eci, fcm, mfcm}
  RcaVariant rca_variant = RcaVariant::joint;
  bool strict_threshold = false;
  double threshold = 1.0;
  double eci_tol = 1e-9;
  FitnessOptions fitness;
  std::vector<std::pair<int, int>> periods;  // growth-regression windows

  std::string output_dir;
  int jobs = 1;

  void validate() const;
  std::string canonical() const;  // deterministic key=value dump, hashed into the manifest
};

struct PipelineOutcome {
  int exit_code = 0;  // 0 ok, 2 when a numerical verdict failed somewhere
  std::vector<std::string> files;
  std::map<std::string, std::string> notes;  // "<year>/<stage>" -> verdict or error
};

/// Runs trade -> RCA -> incidence -> metrics -> rankings for every year,
/// then the cross-year tables and (when GDP data is supplied) the growth
/// regressions. Every artifact lands under output_dir and is listed in
/// manifest.json with a content hash. Numerical verdict failures are
/// recorded and skipped, not fatal; input errors throw.
PipelineOutcome run_pipeline(const PipelineConfig& config);

/// Bundled incidence fixtures: "triangular" (3x3, the clean ECI spectrum)
/// and "nested" (2x2, the FCM zero-decay / M-FCM boundary-drift shape).
IncidenceMatrix fixture_incidence(const std::string& name);

struct SelfTestOptions {
  bool inject_normalization_fault = false;  // corrupts one result to prove detection
  std::uint64_t seed = 20200101;
};

/// Runs the invariant suite on the bundled fixtures and seeded random
/// matrices, printing one PASS/FAIL line per property. Returns the number of
/// failures.
int selftest(std::ostream& out, const SelfTestOptions& opt = {});

}  // namespace ecomplex
