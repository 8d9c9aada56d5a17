// Command-line front end: pipeline, rca, eci, fitness, compare, regress,
// selftest. Flags may also come from a key=value config file (--config);
// explicit flags win.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecomplex/econ.hpp"
#include "ecomplex/io.hpp"
#include "ecomplex/pipeline.hpp"
#include "ecomplex/reflections.hpp"
#include "ecomplex/stats.hpp"

namespace fs = std::filesystem;
using namespace ecomplex;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::degenerate_spectrum:
    case Errc::complex_eigenvalue:
    case Errc::singular_update:
    case Errc::empty_after_prune:
      return 2;
    default:
      return 1;
  }
}

struct CommonInputs {
  std::string trade_csv;
  std::string fixture;
  std::string product_kinds_csv;
  std::vector<int> years;
  std::string output_dir;
  double threshold = 1.0;
  bool strict_threshold = false;
};

void add_common(CLI::App* cmd, CommonInputs& in) {
  cmd->add_option("--trade", in.trade_csv, "Trade CSV (year,country,product,value)");
  cmd->add_option("--fixture", in.fixture, "Bundled fixture: triangular or nested")
      ->check(CLI::IsMember({"triangular", "nested"}));
  cmd->add_option("--product-kinds", in.product_kinds_csv, "Sidecar CSV (product,kind)");
  cmd->add_option("--year", in.years, "Year(s) to process; default: all in the data");
  cmd->add_option("--threshold", in.threshold, "RCA threshold");
  cmd->add_flag("--strict-threshold", in.strict_threshold, "RCA > threshold instead of >=");
  cmd->add_option("-o,--output", in.output_dir, "Output directory")->required();
}

struct LoadedInputs {
  TradeTable table;
  KindMap kinds;
  std::vector<int> years;
  bool from_fixture = false;
  std::string fixture;
};

LoadedInputs load_inputs(const CommonInputs& in) {
  LoadedInputs out;
  if (in.trade_csv.empty() && in.fixture.empty())
    fail(Errc::invalid_argument, "either --trade or --fixture is required");
  if (!in.product_kinds_csv.empty())
    out.kinds =
        parse_file(in.product_kinds_csv, [](std::istream& s) { return read_kind_csv(s); });
  if (!in.fixture.empty()) {
    out.from_fixture = true;
    out.fixture = in.fixture;
    out.years = in.years.empty() ? std::vector<int>{2000} : in.years;
    return out;
  }
  out.table =
      parse_file(in.trade_csv, [](std::istream& s) { return parse_trade_csv(s); }).table;
  out.years = in.years.empty() ? out.table.years() : in.years;
  return out;
}

IncidenceMatrix incidence_for_year(const LoadedInputs& in, const CommonInputs& common,
                                   int year, RcaVariant variant) {
  if (in.from_fixture) return fixture_incidence(in.fixture);
  const ExportMatrix ex = build_export_matrix(in.table, year, in.kinds);
  const RcaMatrix r = variant == RcaVariant::joint ? rca(ex) : concatenated_rca(ex);
  return binarize(r, common.threshold, common.strict_threshold);
}

void write_out(const std::string& dir, const std::string& name, const std::string& contents) {
  fs::create_directories(dir);
  write_file((fs::path(dir) / name).string(), contents);
}

std::map<int, ScoreVector> load_score_series(const std::string& dir, const std::string& metric,
                                             ScoreKind kind) {
  std::map<int, ScoreVector> series;
  const std::string prefix = metric + "_";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0 || name.size() != prefix.size() + 8 ||
        name.substr(prefix.size() + 4) != ".csv")
      continue;
    const int year = std::stoi(name.substr(prefix.size(), 4));
    std::istringstream in(slurp_file(entry.path().string()));
    series[year] = read_score_csv(in, kind, metric);
  }
  if (series.empty())
    fail(Errc::io_error, "no " + prefix + "YYYY.csv files under " + dir);
  return series;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Economic-complexity metrics from country-product trade tables"};
  app.set_config("--config", "",
                 "key=value config file with a [subcommand] section; place the flag before "
                 "the subcommand; explicit flags override the file");
  app.require_subcommand(1);

  // pipeline ---------------------------------------------------------------
  PipelineConfig pipeline_config;
  std::vector<std::string> metric_list{"eci", "mfcm"};
  std::vector<std::string> covariate_specs;
  std::vector<std::string> period_specs;
  std::string rca_variant_name = "joint";
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Full per-year pipeline");
  pipeline_cmd->add_option("--trade", pipeline_config.trade_csv, "Trade CSV");
  pipeline_cmd->add_option("--fixture", pipeline_config.fixture, "Bundled fixture")
      ->check(CLI::IsMember({"triangular", "nested"}));
  pipeline_cmd->add_option("--product-kinds", pipeline_config.product_kinds_csv,
                           "Sidecar CSV (product,kind)");
  pipeline_cmd->add_option("--gdp", pipeline_config.gdp_csv, "GDP per-capita CSV");
  pipeline_cmd->add_option("--covariate", covariate_specs,
                           "Covariate as name=path (repeatable), e.g. coi=coi.csv");
  pipeline_cmd->add_option("--allow-list", pipeline_config.allow_list_path,
                           "Country allow-list (one code per line)");
  pipeline_cmd->add_option("--exclusions", pipeline_config.exclusion_list_path,
                           "Exclusion list lines: country[,year]");
  pipeline_cmd->add_option("--year", pipeline_config.years, "Year(s); default: all");
  pipeline_cmd->add_option("--metric", metric_list,
                           "Metrics: eci, fcm, mfcm, or all (repeatable)");
  pipeline_cmd->add_option("--rca-variant", rca_variant_name, "joint or concatenated")
      ->check(CLI::IsMember({"joint", "concatenated"}));
  pipeline_cmd->add_flag("--strict-threshold", pipeline_config.strict_threshold,
                         "Binarize with RCA > threshold instead of >=");
  pipeline_cmd->add_option("--threshold", pipeline_config.threshold, "RCA threshold");
  pipeline_cmd->add_option("--tol", pipeline_config.fitness.tol, "Fitness residual tolerance");
  pipeline_cmd->add_option("--max-iter", pipeline_config.fitness.max_iter, "Fitness cap");
  pipeline_cmd->add_option("--zero-floor", pipeline_config.fitness.zero_floor,
                           "FCM zero-convergence floor");
  pipeline_cmd->add_option("--boundary-margin", pipeline_config.fitness.boundary_margin,
                           "M-FCM boundary margin");
  pipeline_cmd->add_option("--eci-tol", pipeline_config.eci_tol, "Spectral tolerance");
  pipeline_cmd->add_option("--period", period_specs,
                           "Growth period start:end (repeatable), e.g. 1998:2008");
  pipeline_cmd->add_option("--jobs", pipeline_config.jobs, "Worker pool size");
  pipeline_cmd->add_option("-o,--output", pipeline_config.output_dir, "Output directory")
      ->required();

  // rca ---------------------------------------------------------------------
  CommonInputs rca_in;
  std::string rca_cmd_variant = "joint";
  bool rca_strict = false;
  double rca_threshold = 1.0;
  auto* rca_cmd = app.add_subcommand("rca", "RCA and incidence matrices only");
  add_common(rca_cmd, rca_in);
  rca_cmd->add_option("--rca-variant", rca_cmd_variant, "joint or concatenated")
      ->check(CLI::IsMember({"joint", "concatenated"}));
  rca_cmd->add_flag("--strict-threshold", rca_strict, "RCA > threshold instead of >=");
  rca_cmd->add_option("--threshold", rca_threshold, "RCA threshold");

  // eci ---------------------------------------------------------------------
  CommonInputs eci_in;
  double eci_tol = 1e-9;
  std::string eci_variant = "joint";
  auto* eci_cmd = app.add_subcommand("eci", "ECI/PCI per year");
  add_common(eci_cmd, eci_in);
  eci_cmd->add_option("--eci-tol", eci_tol, "Spectral tolerance");
  eci_cmd->add_option("--rca-variant", eci_variant, "joint or concatenated")
      ->check(CLI::IsMember({"joint", "concatenated"}));

  // fitness -------------------------------------------------------------------
  CommonInputs fit_in;
  std::string fit_method = "mfcm";
  std::string fit_variant = "joint";
  FitnessOptions fit_opt;
  auto* fitness_cmd = app.add_subcommand("fitness", "FCM or M-FCM per year");
  add_common(fitness_cmd, fit_in);
  fitness_cmd->add_option("--method", fit_method, "fcm or mfcm")
      ->check(CLI::IsMember({"fcm", "mfcm"}));
  fitness_cmd->add_option("--rca-variant", fit_variant, "joint or concatenated")
      ->check(CLI::IsMember({"joint", "concatenated"}));
  fitness_cmd->add_option("--tol", fit_opt.tol, "Residual tolerance");
  fitness_cmd->add_option("--max-iter", fit_opt.max_iter, "Iteration cap");
  fitness_cmd->add_option("--zero-floor", fit_opt.zero_floor, "Zero-convergence floor");
  fitness_cmd->add_option("--boundary-margin", fit_opt.boundary_margin, "Boundary margin");

  // compare -------------------------------------------------------------------
  std::string cmp_left_dir, cmp_right_dir, cmp_left_metric, cmp_right_metric, cmp_output;
  auto* compare_cmd =
      app.add_subcommand("compare", "Yearly Spearman correlation of two score series");
  compare_cmd->add_option("--left-dir", cmp_left_dir, "Directory of <metric>_YYYY.csv files")
      ->required();
  compare_cmd->add_option("--left-metric", cmp_left_metric, "Metric prefix on the left")
      ->required();
  compare_cmd->add_option("--right-dir", cmp_right_dir, "Directory on the right")->required();
  compare_cmd->add_option("--right-metric", cmp_right_metric, "Metric prefix on the right")
      ->required();
  compare_cmd->add_option("-o,--output", cmp_output, "Output CSV path")->required();

  // regress ---------------------------------------------------------------------
  std::string reg_mode = "growth";
  std::string reg_gdp, reg_scores_dir, reg_metric = "eci", reg_output_dir, reg_exclusions;
  std::string reg_kinds;
  std::vector<std::string> reg_covariates, reg_periods;
  bool reg_no_fe = false;
  bool reg_log_metric = false;
  auto* regress_cmd = app.add_subcommand("regress", "Growth or PCI service-dummy regressions");
  regress_cmd->add_option("--mode", reg_mode, "growth or pci-service")
      ->check(CLI::IsMember({"growth", "pci-service"}));
  regress_cmd->add_option("--gdp", reg_gdp, "GDP per-capita CSV (growth mode)");
  regress_cmd->add_option("--scores-dir", reg_scores_dir, "Directory of score CSVs")->required();
  regress_cmd->add_option("--metric", reg_metric, "Score file prefix, e.g. eci or pci");
  regress_cmd->add_option("--covariate", reg_covariates, "Covariate name=path (repeatable)");
  regress_cmd->add_option("--period", reg_periods, "start:end (repeatable)");
  regress_cmd->add_option("--exclusions", reg_exclusions, "Exclusion list path");
  regress_cmd->add_option("--product-kinds", reg_kinds, "Kinds CSV (pci-service mode)");
  regress_cmd->add_flag("--no-period-fe", reg_no_fe, "Drop period dummies; ordinary SEs");
  regress_cmd->add_flag("--log-metric", reg_log_metric, "Regress on log of the metric");
  regress_cmd->add_option("-o,--output", reg_output_dir, "Output directory")->required();

  // selftest --------------------------------------------------------------------
  SelfTestOptions selftest_opt;
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in invariant suite");
  selftest_cmd->add_flag("--inject-normalization-fault", selftest_opt.inject_normalization_fault)
      ->group("");  // debug hook, hidden from help
  selftest_cmd->add_option("--seed", selftest_opt.seed, "Base seed for the random properties");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pipeline_cmd) {
      pipeline_config.metrics.clear();
      for (const auto& m : metric_list) {
        if (m == "all") {
          pipeline_config.metrics = {"eci", "fcm", "mfcm"};
          break;
        }
        for (std::size_t start = 0; start < m.size();) {  // allow comma-separated values
          const std::size_t comma = m.find(',', start);
          pipeline_config.metrics.insert(m.substr(start, comma - start));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      pipeline_config.rca_variant =
          rca_variant_name == "joint" ? RcaVariant::joint : RcaVariant::concatenated;
      for (const auto& spec : covariate_specs) {
        const std::size_t eq = spec.find('=');
        if (eq == std::string::npos)
          fail(Errc::invalid_argument, "--covariate expects name=path, got " + spec);
        pipeline_config.covariate_csvs[spec.substr(0, eq)] = spec.substr(eq + 1);
      }
      for (const auto& spec : period_specs) {
        const std::size_t colon = spec.find(':');
        if (colon == std::string::npos)
          fail(Errc::invalid_argument, "--period expects start:end, got " + spec);
        pipeline_config.periods.emplace_back(std::stoi(spec.substr(0, colon)),
                                             std::stoi(spec.substr(colon + 1)));
      }
      const PipelineOutcome outcome = run_pipeline(pipeline_config);
      for (const auto& [key, value] : outcome.notes)
        std::cout << key << ": " << value << "\n";
      std::cout << outcome.files.size() << " files under " << pipeline_config.output_dir
                << "\n";
      return outcome.exit_code;
    }

    if (*rca_cmd) {
      const LoadedInputs in = load_inputs(rca_in);
      const RcaVariant variant =
          rca_cmd_variant == "joint" ? RcaVariant::joint : RcaVariant::concatenated;
      for (const int year : in.years) {
        const std::string y = std::to_string(year);
        if (in.from_fixture) {
          const IncidenceMatrix m = fixture_incidence(in.fixture);
          std::ostringstream out;
          write_matrix_csv(out, "country", m.countries, m.products, m.bits);
          write_out(rca_in.output_dir, "incidence_" + y + ".csv", out.str());
          continue;
        }
        const ExportMatrix ex = build_export_matrix(in.table, year, in.kinds);
        const RcaMatrix r = variant == RcaVariant::joint ? rca(ex) : concatenated_rca(ex);
        const IncidenceMatrix m = binarize(r, rca_threshold, rca_strict);
        std::ostringstream rout, mout;
        write_matrix_csv(rout, "country", r.countries, r.products, r.values);
        write_matrix_csv(mout, "country", m.countries, m.products, m.bits);
        write_out(rca_in.output_dir, "rca_" + y + ".csv", rout.str());
        write_out(rca_in.output_dir, "incidence_" + y + ".csv", mout.str());
      }
      return 0;
    }

    if (*eci_cmd) {
      const LoadedInputs in = load_inputs(eci_in);
      const RcaVariant variant =
          eci_variant == "joint" ? RcaVariant::joint : RcaVariant::concatenated;
      for (const int year : in.years) {
        const std::string y = std::to_string(year);
        const IncidenceMatrix m = incidence_for_year(in, year, variant, 1.0, false);
        const ComplexityIndex country_index = eci(m, eci_tol);
        const ComplexityIndex product_index = pci(m, eci_tol);
        std::ostringstream ce, cp;
        write_score_csv(ce, country_index.scores);
        write_score_csv(cp, product_index.scores);
        write_out(eci_in.output_dir, "eci_" + y + ".csv", ce.str());
        write_out(eci_in.output_dir, "pci_" + y + ".csv", cp.str());
        write_out(eci_in.output_dir, "spectral_eci_" + y + ".json",
                  spectral_json(country_index.spectral));
        write_out(eci_in.output_dir, "spectral_pci_" + y + ".json",
                  spectral_json(product_index.spectral));
      }
      return 0;
    }

    if (*fitness_cmd) {
      const LoadedInputs in = load_inputs(fit_in);
      const RcaVariant variant =
          fit_variant == "joint" ? RcaVariant::joint : RcaVariant::concatenated;
      int exit_code = 0;
      for (const int year : in.years) {
        const std::string y = std::to_string(year);
        const IncidenceMatrix m = incidence_for_year(in, year, variant, 1.0, false);
        const FixedPointResult result =
            fit_method == "fcm" ? fcm(m, fit_opt) : mfcm(m, fit_opt);
        std::ostringstream cout_, pout_;
        write_score_csv(cout_, result.country_scores);
        write_score_csv(pout_, result.product_scores);
        write_out(fit_in.output_dir, "fitness_" + fit_method + "_" + y + ".csv", cout_.str());
        write_out(fit_in.output_dir, "product_complexity_" + fit_method + "_" + y + ".csv",
                  pout_.str());
        write_out(fit_in.output_dir, "fitness_result_" + fit_method + "_" + y + ".json",
                  fitness_result_json(result, fit_method == "fcm" ? FitnessMethod::fcm
                                                                  : FitnessMethod::mfcm));
        std::cout << year << ": " << to_string(result.verdict) << " in " << result.iterations
                  << " iterations\n";
      }
      return exit_code;
    }

    if (*compare_cmd) {
      const auto left = load_score_series(cmp_left_dir, cmp_left_metric, ScoreKind::country);
      const auto right = load_score_series(cmp_right_dir, cmp_right_metric, ScoreKind::country);
      const auto rows = yearly_rank_correlation(left, right);
      std::ostringstream out;
      write_correlation_csv(out, rows);
      fs::create_directories(fs::path(cmp_output).parent_path().string().empty()
                                 ? "."
                                 : fs::path(cmp_output).parent_path().string());
      write_file(cmp_output, out.str());
      for (const auto& r : rows)
        std::cout << r.year << ": rho=" << format_double(r.rho) << " n=" << r.n << "\n";
      return 0;
    }

    if (*regress_cmd) {
      fs::create_directories(reg_output_dir);
      if (reg_mode == "pci-service") {
        if (reg_kinds.empty())
          fail(Errc::invalid_argument, "pci-service mode needs --product-kinds");
        std::istringstream kin(slurp_file(reg_kinds));
        const KindMap kinds = read_kind_csv(kin);
        const auto series = load_score_series(reg_scores_dir, reg_metric, ScoreKind::product);
        std::vector<PciPanelRow> rows;
        for (const auto& [year, scores] : series)
          for (std::size_t i = 0; i < scores.labels.size(); ++i) {
            const auto it = kinds.find(scores.labels[i]);
            if (it == kinds.end())
              fail(Errc::missing_kind, "no kind for product " + scores.labels[i]);
            rows.push_back({year, scores.labels[i],
                            scores.values(static_cast<Eigen::Index>(i)),
                            it->second == ProductKind::service});
          }
        const RegressionResult result = pci_service_regression(rows);
        write_out(reg_output_dir, "pci_service.json", regression_json(result));
        write_out(reg_output_dir, "pci_service.csv",
                  regression_csv(result, {"service_dummy"}));
        write_out(reg_output_dir, "pci_service.txt",
                  regression_text(result, {"service_dummy"}));
        std::cout << "service_dummy = " << format_double(result.coefficients.at("service_dummy"))
                  << " (" << format_double(result.se.at("service_dummy")) << ")\n";
        return 0;
      }

      if (reg_gdp.empty()) fail(Errc::invalid_argument, "growth mode needs --gdp");
      if (reg_periods.empty()) fail(Errc::invalid_argument, "growth mode needs --period");
      std::istringstream gin(slurp_file(reg_gdp));
      const SeriesMap gdp = read_series_csv(gin);
      std::map<std::string, SeriesMap> covariates;
      for (const auto& spec : reg_covariates) {
        const std::size_t eq = spec.find('=');
        if (eq == std::string::npos)
          fail(Errc::invalid_argument, "--covariate expects name=path, got " + spec);
        std::istringstream cin_(slurp_file(spec.substr(eq + 1)));
        covariates[spec.substr(0, eq)] = read_series_csv(cin_);
      }
      const auto series = load_score_series(reg_scores_dir, reg_metric, ScoreKind::country);
      SeriesMap metric_series;
      for (const auto& [year, scores] : series)
        for (std::size_t i = 0; i < scores.labels.size(); ++i) {
          const double v = scores.values(static_cast<Eigen::Index>(i));
          metric_series[{scores.labels[i], year}] = reg_log_metric ? std::log(v) : v;
        }
      const std::string var = (reg_log_metric ? "log_" : "") + reg_metric;
      covariates[var] = std::move(metric_series);

      std::vector<std::pair<int, int>> periods;
      for (const auto& spec : reg_periods) {
        const std::size_t colon = spec.find(':');
        if (colon == std::string::npos)
          fail(Errc::invalid_argument, "--period expects start:end, got " + spec);
        periods.emplace_back(std::stoi(spec.substr(0, colon)), std::stoi(spec.substr(colon + 1)));
      }
      PanelBuild build = align_panel(gdp, covariates, periods);
      if (!reg_exclusions.empty()) {
        std::istringstream ein(slurp_file(reg_exclusions));
        const auto exclusions = read_exclusion_list(ein);
        std::erase_if(build.observations, [&](const PanelObservation& obs) {
          for (const auto& [country, year] : exclusions)
            if (country == obs.country && (year == kAllYears || year == obs.period_start))
              return true;
          return false;
        });
      }
      std::vector<std::string> controls{"log_initial_gdp"};
      for (const auto& [name, unused] : covariates)
        if (name != var && name != "log_initial_gdp") controls.push_back(name);
      const GrowthColumn column = growth_regression(
          build.observations, {var}, controls,
          reg_no_fe ? GrowthVariant::no_period_fe : GrowthVariant::standard);
      write_out(reg_output_dir, "growth_" + reg_metric + ".json",
                regression_json(column.result));
      write_out(reg_output_dir, "growth_" + reg_metric + ".csv",
                regression_csv(column.result, column.row_order));
      write_out(reg_output_dir, "growth_" + reg_metric + ".txt",
                regression_text(column.result, column.row_order));
      std::cout << var << " = " << format_double(column.result.coefficients.at(var)) << " ("
                << format_double(column.result.se.at(var)) << ") n=" << column.result.n_obs
                << "\n";
      return 0;
    }

    if (*selftest_cmd) return selftest(std::cout, selftest_opt) == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
