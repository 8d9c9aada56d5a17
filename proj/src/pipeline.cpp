#include "ecomplex/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ecomplex/econ.hpp"
#include "ecomplex/io.hpp"
#include "ecomplex/reflections.hpp"
#include "ecomplex/stats.hpp"

namespace ecomplex {

namespace fs = std::filesystem;

IncidenceMatrix fixture_incidence(const std::string& name) {
  IncidenceMatrix m;
  m.threshold = 1.0;
  if (name == "triangular") {
    m.countries = {"AAA", "BBB", "CCC"};
    m.products = {"p1", "p2", "p3"};
    m.bits.resize(3, 3);
    m.bits << 1, 1, 1, 1, 1, 0, 1, 0, 0;
    m.product_kind = {ProductKind::good, ProductKind::good, ProductKind::service};
  } else if (name == "nested") {
    m.countries = {"AAA", "BBB"};
    m.products = {"p1", "p2"};
    m.bits.resize(2, 2);
    m.bits << 1, 1, 0, 1;
    m.product_kind = {ProductKind::good, ProductKind::good};
  } else {
    fail(Errc::invalid_argument, "unknown fixture '" + name + "'");
  }
  m.validate();
  return m;
}

void PipelineConfig::validate() const {
  if (trade_csv.empty() && fixture.empty())
    fail(Errc::invalid_argument, "either a trade CSV or a fixture is required");
  if (!trade_csv.empty() && !fixture.empty())
    fail(Errc::invalid_argument, "trade CSV and fixture are mutually exclusive");
  if (output_dir.empty()) fail(Errc::invalid_argument, "output directory is required");
  for (const auto& metric : metrics)
    if (metric != "eci" && metric != "fcm" && metric != "mfcm")
      fail(Errc::invalid_argument, "unknown metric '" + metric + "'");
  if (metrics.empty()) fail(Errc::invalid_argument, "no metrics selected");
  if (threshold <= 0) fail(Errc::invalid_argument, "threshold must be positive");
  if (eci_tol <= 0) fail(Errc::invalid_argument, "eci tolerance must be positive");
  if (jobs < 1) fail(Errc::invalid_argument, "jobs must be at least 1");
  for (const auto& [start, end] : periods)
    if (end <= start) fail(Errc::invalid_argument, "period end must exceed start");
}

std::string PipelineConfig::canonical() const {
  std::ostringstream out;
  out << "trade_csv=" << trade_csv << "\nfixture=" << fixture
      << "\nproduct_kinds_csv=" << product_kinds_csv << "\ngdp_csv=" << gdp_csv << "\n";
  for (const auto& [name, path] : covariate_csvs) out << "covariate:" << name << "=" << path << "\n";
  out << "allow_list=" << allow_list_path << "\nexclusion_list=" << exclusion_list_path << "\n";
  out << "years=";
  for (const int y : years) out << y << ";";
  out << "\nmetrics=";
  for (const auto& m : metrics) out << m << ";";
  out << "\nrca_variant=" << (rca_variant == RcaVariant::joint ? "joint" : "concatenated")
      << "\nstrict_threshold=" << strict_threshold << "\nthreshold=" << format_double(threshold)
      << "\neci_tol=" << format_double(eci_tol) << "\ntol=" << format_double(fitness.tol)
      << "\nmax_iter=" << fitness.max_iter << "\nzero_floor=" << format_double(fitness.zero_floor)
      << "\nboundary_margin=" << format_double(fitness.boundary_margin) << "\nperiods=";
  for (const auto& [a, b] : periods) out << a << ":" << b << ";";
  out << "\n";
  return out.str();
}

namespace {

struct YearResult {
  int year = 0;
  std::optional<RcaMatrix> rca_matrix;
  std::optional<IncidenceMatrix> incidence;
  PruneReport prune;
  MatrixBuildReport build_report;
  std::optional<ScoreVector> div, ubiq;
  std::optional<ComplexityIndex> eci_result, pci_result;
  std::map<std::string, FixedPointResult> fitness_results;  // "fcm" / "mfcm"
  std::map<std::string, std::string> notes;                 // stage -> message
  bool numerical_failure = false;
};

bool is_numerical(Errc code) {
  return code == Errc::degenerate_spectrum || code == Errc::complex_eigenvalue ||
         code == Errc::singular_update || code == Errc::empty_after_prune;
}

YearResult process_year(const PipelineConfig& config, const TradeTable& table,
                        const KindMap& kinds, int year) {
  YearResult r;
  r.year = year;

  if (!config.fixture.empty()) {
    r.incidence = fixture_incidence(config.fixture);
  } else {
    const ExportMatrix ex = build_export_matrix(table, year, kinds, &r.build_report);
    const RcaMatrix rm =
        config.rca_variant == RcaVariant::joint ? rca(ex) : concatenated_rca(ex);
    try {
      r.incidence = binarize(rm, config.threshold, config.strict_threshold, &r.prune);
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw;
      r.notes["incidence"] = e.what();
      r.numerical_failure = true;
      r.rca_matrix = rm;
      return r;
    }
    r.rca_matrix = rm;
  }

  const IncidenceMatrix& m = *r.incidence;
  r.div = diversity(m);
  r.ubiq = ubiquity(m);

  if (config.metrics.count("eci")) {
    try {
      r.eci_result = eci(m, config.eci_tol);
      r.pci_result = pci(m, config.eci_tol);
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw;
      r.notes["eci"] = e.what();
      r.numerical_failure = true;
    }
  }
  for (const char* method : {"fcm", "mfcm"}) {
    if (!config.metrics.count(method)) continue;
    try {
      FixedPointResult result = method == std::string("fcm") ? fcm(m, config.fitness)
                                                             : mfcm(m, config.fitness);
      r.notes[method] = to_string(result.verdict);
      r.fitness_results.emplace(method, std::move(result));
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw;
      r.notes[method] = e.what();
      r.numerical_failure = true;
    }
  }
  return r;
}

class OutputWriter {
 public:
  explicit OutputWriter(const fs::path& dir) : dir_(dir) {}

  void write(const std::string& name, const std::string& contents) {
    write_file((dir_ / name).string(), contents);
    hashes_[name] = fnv1a64(contents);
  }

  const std::map<std::string, std::uint64_t>& hashes() const { return hashes_; }

 private:
  fs::path dir_;
  std::map<std::string, std::uint64_t> hashes_;
};

std::string csv_of_scores(const ScoreVector& s) {
  std::ostringstream out;
  write_score_csv(out, s);
  return out.str();
}

std::string csv_of_matrix(const std::string& corner, const std::vector<std::string>& rows,
                          const std::vector<std::string>& cols, const Eigen::MatrixXd& m) {
  std::ostringstream out;
  write_matrix_csv(out, corner, rows, cols, m);
  return out.str();
}

ScoreVector log_scores(const ScoreVector& s, const std::string& metric) {
  ScoreVector out = s;
  out.values = s.values.array().log();
  out.metric = metric;
  return out;
}

TradeTable goods_only(const TradeTable& table, const KindMap& kinds) {
  TradeTable out;
  out.metadata = table.metadata;
  for (const auto& rec : table.records) {
    const auto it = kinds.find(rec.product);
    if (it == kinds.end() || it->second == ProductKind::good) out.records.push_back(rec);
  }
  return out;
}

}  // namespace

PipelineOutcome run_pipeline(const PipelineConfig& config) {
  config.validate();
  PipelineOutcome outcome;

  TradeTable table;
  std::size_t duplicates = 0;
  KindMap kinds;
  if (!config.product_kinds_csv.empty())
    kinds = parse_file(config.product_kinds_csv, [](std::istream& in) { return read_kind_csv(in); });
  if (!config.trade_csv.empty()) {
    ParseResult parsed =
        parse_file(config.trade_csv, [](std::istream& in) { return parse_trade_csv(in); });
    table = std::move(parsed.table);
    duplicates = parsed.duplicates_summed;
    if (!config.allow_list_path.empty()) {
      const auto codes = parse_file(config.allow_list_path,
                                    [](std::istream& in) { return read_code_list(in); });
      const std::set<std::string> allowed(codes.begin(), codes.end());
      std::erase_if(table.records,
                    [&](const TradeRecord& rec) { return !allowed.count(rec.country); });
      if (table.records.empty()) fail(Errc::empty_input, "allow list removed every record");
    }
  }

  std::vector<int> years = config.years;
  if (years.empty()) years = config.fixture.empty() ? table.years() : std::vector<int>{2000};
  if (years.empty()) fail(Errc::invalid_argument, "no years to process");

  // Bounded worker pool; results land in fixed slots so the single writer
  // below emits files in deterministic year order.
  std::vector<YearResult> results(years.size());
  std::vector<std::exception_ptr> errors(years.size());
  std::atomic<std::size_t> cursor{0};
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_workers =
      std::min<std::size_t>(std::max(1, config.jobs), std::max(1u, hw ? hw : 1u));
  auto work = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= years.size()) return;
      try {
        results[i] = process_year(config, table, kinds, years[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < years.size(); ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  fs::create_directories(config.output_dir);
  OutputWriter writer{fs::path(config.output_dir)};

  std::map<std::string, std::map<int, ScoreVector>> country_series;  // metric -> year -> scores
  std::map<int, ScoreVector> eci_series_product;                     // pci by year
  nlohmann::json notes = nlohmann::json::object();

  auto joined = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  for (const auto& r : results) {
    const std::string y = std::to_string(r.year);
    for (const auto& [stage, message] : r.notes) notes[y + "/" + stage] = message;
    if (r.numerical_failure) outcome.exit_code = 2;
    if (!r.build_report.removed_countries.empty() || !r.build_report.removed_products.empty())
      notes[y + "/zero_total_removed"] = "countries:" + joined(r.build_report.removed_countries) +
                                         ";products:" + joined(r.build_report.removed_products);
    if (!r.prune.removed_countries.empty() || !r.prune.removed_products.empty())
      notes[y + "/pruned"] = "countries:" + joined(r.prune.removed_countries) +
                             ";products:" + joined(r.prune.removed_products);

    if (r.rca_matrix)
      writer.write("rca_" + y + ".csv", csv_of_matrix("country", r.rca_matrix->countries,
                                                      r.rca_matrix->products,
                                                      r.rca_matrix->values));
    if (!r.incidence) continue;
    writer.write("incidence_" + y + ".csv",
                 csv_of_matrix("country", r.incidence->countries, r.incidence->products,
                               r.incidence->bits));
    writer.write("diversity_" + y + ".csv", csv_of_scores(*r.div));
    writer.write("ubiquity_" + y + ".csv", csv_of_scores(*r.ubiq));
    country_series["diversity"][r.year] = *r.div;

    if (r.eci_result) {
      writer.write("eci_" + y + ".csv", csv_of_scores(r.eci_result->scores));
      writer.write("pci_" + y + ".csv", csv_of_scores(r.pci_result->scores));
      writer.write("spectral_eci_" + y + ".json", spectral_json(r.eci_result->spectral));
      writer.write("spectral_pci_" + y + ".json", spectral_json(r.pci_result->spectral));
      country_series["eci"][r.year] = r.eci_result->scores;
      eci_series_product[r.year] = r.pci_result->scores;
    }
    for (const auto& [method, result] : r.fitness_results) {
      writer.write("fitness_" + method + "_" + y + ".csv", csv_of_scores(result.country_scores));
      writer.write("product_complexity_" + method + "_" + y + ".csv",
                   csv_of_scores(result.product_scores));
      writer.write("fitness_result_" + method + "_" + y + ".json",
                   fitness_result_json(result, method == "fcm" ? FitnessMethod::fcm
                                                               : FitnessMethod::mfcm));
      country_series["fitness_" + method][r.year] = result.country_scores;
    }
  }

  // Cross-year tables: rankings, box stats, pairwise yearly correlations.
  for (const auto& [metric, by_year] : country_series) {
    std::map<int, Ranking> rankings;
    for (const auto& [year, scores] : by_year) {
      rankings[year] = rank_scores(scores);
      rankings[year].year = year;
    }
    std::ostringstream rank_out;
    write_ranking_csv(rank_out, rankings);
    writer.write("rankings_" + metric + ".csv", rank_out.str());

    const bool is_fitness = metric.rfind("fitness_", 0) == 0;
    std::map<int, BoxStats> boxes;
    for (const auto& [year, scores] : by_year) {
      if (scores.size() < 4) continue;
      boxes[year] = box_stats(is_fitness ? log_scores(scores, "log_" + metric) : scores);
    }
    if (!boxes.empty()) {
      std::ostringstream box_out;
      write_box_csv(box_out, boxes);
      writer.write(std::string("box_") + (is_fitness ? "log_" : "") + metric + ".csv",
                   box_out.str());
    }
  }
  for (auto a = country_series.begin(); a != country_series.end(); ++a)
    for (auto b = std::next(a); b != country_series.end(); ++b) {
      try {
        const auto rows = yearly_rank_correlation(a->second, b->second);
        std::ostringstream corr_out;
        write_correlation_csv(corr_out, rows);
        writer.write("spearman_" + a->first + "_vs_" + b->first + ".csv", corr_out.str());
      } catch (const Error& e) {
        if (e.code() != Errc::no_common_years && e.code() != Errc::insufficient_overlap) throw;
        notes["spearman_" + a->first + "_vs_" + b->first] = e.what();
      }
    }

  // Growth regressions against each computed country metric.
  if (!config.gdp_csv.empty() && !config.periods.empty() && !config.trade_csv.empty()) {
    const SeriesMap gdp =
        parse_file(config.gdp_csv, [](std::istream& in) { return read_series_csv(in); });
    std::map<std::string, SeriesMap> covariates;
    for (const auto& [name, path] : config.covariate_csvs)
      covariates[name] = parse_file(path, [](std::istream& in) { return read_series_csv(in); });

    const TradeTable goods_table = goods_only(table, kinds);
    SeriesMap nr_series;
    for (const auto& [start, end] : config.periods) {
      std::set<std::string> countries;
      for (const auto& [key, unused] : gdp)
        if (key.second == start) countries.insert(key.first);
      for (const auto& country : countries) {
        const auto g0 = gdp.find({country, start});
        if (g0 == gdp.end() || g0->second <= 0) continue;
        try {
          nr_series[{country, start}] =
              nr_export_increase(goods_table, g0->second, country, start, end - start);
        } catch (const Error& e) {
          if (e.code() != Errc::missing_period) throw;
        }
      }
    }
    covariates["nr_increase"] = std::move(nr_series);

    std::vector<std::pair<std::string, int>> exclusions;
    if (!config.exclusion_list_path.empty())
      exclusions = parse_file(config.exclusion_list_path,
                              [](std::istream& in) { return read_exclusion_list(in); });

    for (const auto& [metric, by_year] : country_series) {
      const bool is_fitness = metric.rfind("fitness_", 0) == 0;
      const std::string var = is_fitness ? "log_" + metric : metric;
      std::map<std::string, SeriesMap> covs = covariates;
      SeriesMap metric_series;
      for (const auto& [year, scores] : by_year)
        for (std::size_t i = 0; i < scores.labels.size(); ++i) {
          const double v = scores.values(static_cast<Eigen::Index>(i));
          metric_series[{scores.labels[i], year}] = is_fitness ? std::log(v) : v;
        }
      covs[var] = std::move(metric_series);

      PanelBuild build = align_panel(gdp, covs, config.periods);
      int excluded = 0;
      std::erase_if(build.observations, [&](const PanelObservation& obs) {
        for (const auto& [country, year] : exclusions)
          if (country == obs.country && (year == kAllYears || year == obs.period_start)) {
            ++excluded;
            return true;
          }
        return false;
      });
      notes["regress_" + metric + "/excluded"] = std::to_string(excluded);
      for (const auto& [reason, count] : build.exclusions)
        notes["regress_" + metric + "/" + reason] = std::to_string(count);

      std::vector<std::string> controls{"log_initial_gdp", "nr_increase"};
      for (const auto& [name, unused] : config.covariate_csvs) controls.push_back(name);
      try {
        const GrowthColumn column = growth_regression(build.observations, {var}, controls);
        std::vector<std::string> rows = column.row_order;
        writer.write("regress_" + metric + ".csv", regression_csv(column.result, rows));
        writer.write("regress_" + metric + ".txt", regression_text(column.result, rows));
        writer.write("regress_" + metric + ".json", regression_json(column.result));
      } catch (const Error& e) {
        notes["regress_" + metric] = e.what();
        outcome.exit_code = 2;
      }
    }
  }

  // Manifest last: every file with its content hash plus the config hash.
  notes["spearman_method"] = "rank-pearson, ties averaged, label intersection";
  nlohmann::json manifest;
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.canonical())));
  manifest["config_hash"] = hash_buf;
  manifest["duplicates_summed"] = duplicates;
  manifest["notes"] = notes;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, hash] : writer.hashes()) {
    std::snprintf(hash_buf, sizeof hash_buf, "%016llx", static_cast<unsigned long long>(hash));
    files[name] = hash_buf;
    outcome.files.push_back(name);
  }
  manifest["files"] = std::move(files);
  write_file((fs::path(config.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  outcome.files.push_back("manifest.json");

  for (const auto& [key, value] : notes.items()) outcome.notes[key] = value;
  return outcome;
}

}  // namespace ecomplex
