#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>

#include "eqmest/harness.hpp"
#include "eqmest/io.hpp"

namespace eqmest {

namespace {

using nlohmann::json;

std::string aggregate_path(const std::string& path) {
  const std::size_t dot = path.rfind('.');
  const std::size_t sep = path.find_last_of("/\\");
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep))
    return path + ".agg";
  return path.substr(0, dot) + ".agg" + path.substr(dot);
}

std::vector<RunResult> sorted_rows(const std::vector<RunResult>& results) {
  std::vector<RunResult> rows = results;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RunResult& a, const RunResult& b) {
                     if (a.process_id != b.process_id)
                       return a.process_id < b.process_id;
                     if (a.missing_fraction != b.missing_fraction)
                       return a.missing_fraction < b.missing_fraction;
                     return static_cast<int>(a.algorithm) <
                            static_cast<int>(b.algorithm);
                   });
  return rows;
}

struct Aggregate {
  Algorithm algorithm;
  double missing_fraction;
  int n_runs = 0;
  int n_failed = 0;
  double fit_mean = 0, fit_ci95 = 0;
  double time_mean = 0, time_ci95 = 0;
  double iters_mean = 0, iters_ci95 = 0;
  double loglik_mean = 0, loglik_ci95 = 0;
};

void mean_and_ci(const std::vector<double>& xs, double& mean, double& ci95) {
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) {
    mean = std::numeric_limits<double>::quiet_NaN();
    ci95 = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) {
    ci95 = 0;
    return;
  }
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  ci95 = 1.96 * sd / std::sqrt(n);
}

std::vector<Aggregate> aggregate(const std::vector<RunResult>& rows) {
  std::map<std::pair<int, double>, std::vector<const RunResult*>> groups;
  for (const auto& row : rows)
    groups[{static_cast<int>(row.algorithm), row.missing_fraction}].push_back(
        &row);

  std::vector<Aggregate> aggregates;
  for (const auto& [key, members] : groups) {
    Aggregate agg;
    agg.algorithm = static_cast<Algorithm>(key.first);
    agg.missing_fraction = key.second;
    std::vector<double> fits, times, iters, logliks;
    for (const RunResult* row : members) {
      if (row->termination == Termination::failed) {
        ++agg.n_failed;
        continue;
      }
      ++agg.n_runs;
      fits.push_back(row->fit);
      times.push_back(row->wall_time_s);
      iters.push_back(static_cast<double>(row->iterations));
      logliks.push_back(row->final_loglik);
    }
    mean_and_ci(fits, agg.fit_mean, agg.fit_ci95);
    mean_and_ci(times, agg.time_mean, agg.time_ci95);
    mean_and_ci(iters, agg.iters_mean, agg.iters_ci95);
    mean_and_ci(logliks, agg.loglik_mean, agg.loglik_ci95);
    aggregates.push_back(agg);
  }
  std::sort(aggregates.begin(), aggregates.end(),
            [](const Aggregate& a, const Aggregate& b) {
              if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
              return a.missing_fraction < b.missing_fraction;
            });
  return aggregates;
}

json config_json(const SweepConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["n_processes"] = cfg.n_processes;
  j["series_length"] = cfg.series_length;
  j["sigma2"] = cfg.sigma2;
  j["missing_fractions"] = cfg.missing_fractions;
  j["p_min"] = cfg.p_min;
  j["p_max"] = cfg.p_max;
  j["fixed_p"] = cfg.fixed_p;
  j["fixed_q"] = cfg.fixed_q;
  j["theta0"] = cfg.theta0;
  j["master_seed"] = cfg.master_seed;
  j["jobs"] = cfg.jobs;
  j["eqm_policy"] = {{"max_iters", cfg.eqm_policy.max_iters},
                     {"stop", to_string(cfg.eqm_policy.stop)},
                     {"tol", cfg.eqm_policy.tol}};
  j["em_policy"] = {{"max_iters", cfg.em_policy.max_iters},
                    {"stop", to_string(cfg.em_policy.stop)},
                    {"tol", cfg.em_policy.tol}};
  if (cfg.case_phi.size() > 0) {
    j["case_phi"] = std::vector<double>(cfg.case_phi.begin(), cfg.case_phi.end());
    j["case_lambda"] =
        std::vector<double>(cfg.case_lambda.begin(), cfg.case_lambda.end());
  }
  return j;
}

json row_json(const RunResult& row) {
  json j;
  j["process_id"] = row.process_id;
  j["algorithm"] = to_string(row.algorithm);
  j["missing_fraction"] = row.missing_fraction;
  j["fit"] = std::isfinite(row.fit) ? json(row.fit) : json(nullptr);
  j["wall_time_s"] = row.wall_time_s;
  j["iterations"] = row.iterations;
  j["final_loglik"] =
      std::isfinite(row.final_loglik) ? json(row.final_loglik) : json(nullptr);
  j["clamp_count"] = row.clamp_count;
  j["termination"] = to_string(row.termination);
  if (!row.error.empty()) j["error"] = row.error;
  return j;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file: " + path);
  return out;
}

void write_rows_csv(const std::vector<RunResult>& rows,
                    const std::string& path) {
  auto out = open_or_throw(path);
  out << "process_id,algorithm,missing_fraction,fit,wall_time_s,iterations,"
         "final_loglik,clamp_count,termination\n";
  for (const auto& row : rows) {
    out << row.process_id << ',' << to_string(row.algorithm) << ','
        << format_double(row.missing_fraction) << ',' << format_double(row.fit)
        << ',' << format_double(row.wall_time_s) << ',' << row.iterations
        << ',' << format_double(row.final_loglik) << ',' << row.clamp_count
        << ',' << to_string(row.termination) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_aggregates_csv(const std::vector<Aggregate>& aggregates,
                          const std::string& path) {
  auto out = open_or_throw(path);
  out << "algorithm,missing_fraction,n_runs,n_failed,fit_mean,fit_ci95,"
         "wall_time_mean_s,wall_time_ci95_s,iterations_mean,iterations_ci95,"
         "final_loglik_mean,final_loglik_ci95\n";
  for (const auto& agg : aggregates) {
    out << to_string(agg.algorithm) << ',' << format_double(agg.missing_fraction)
        << ',' << agg.n_runs << ',' << agg.n_failed << ','
        << format_double(agg.fit_mean) << ',' << format_double(agg.fit_ci95)
        << ',' << format_double(agg.time_mean) << ','
        << format_double(agg.time_ci95) << ',' << format_double(agg.iters_mean)
        << ',' << format_double(agg.iters_ci95) << ','
        << format_double(agg.loglik_mean) << ','
        << format_double(agg.loglik_ci95) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void emit_report(const std::vector<RunResult>& results, const SweepConfig& cfg,
                 ReportFormat format, const std::string& path) {
  if (results.empty())
    throw std::invalid_argument("emit_report: no results to report");
  const std::vector<RunResult> rows = sorted_rows(results);
  const std::vector<Aggregate> aggregates = aggregate(rows);
  const std::string agg_path = aggregate_path(path);

  if (format == ReportFormat::csv) {
    write_rows_csv(rows, path);
    write_aggregates_csv(aggregates, agg_path);
    return;
  }

  json report;
  report["config"] = config_json(cfg);
  report["results"] = json::array();
  for (const auto& row : rows) report["results"].push_back(row_json(row));
  {
    auto out = open_or_throw(path);
    out << report.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
  }

  json agg_report;
  agg_report["config"] = config_json(cfg);
  agg_report["aggregates"] = json::array();
  for (const auto& agg : aggregates) {
    json j;
    j["algorithm"] = to_string(agg.algorithm);
    j["missing_fraction"] = agg.missing_fraction;
    j["n_runs"] = agg.n_runs;
    j["n_failed"] = agg.n_failed;
    j["fit_mean"] = agg.fit_mean;
    j["fit_ci95"] = agg.fit_ci95;
    j["wall_time_mean_s"] = agg.time_mean;
    j["wall_time_ci95_s"] = agg.time_ci95;
    j["iterations_mean"] = agg.iters_mean;
    j["iterations_ci95"] = agg.iters_ci95;
    j["final_loglik_mean"] = agg.loglik_mean;
    j["final_loglik_ci95"] = agg.loglik_ci95;
    agg_report["aggregates"].push_back(j);
  }
  auto out = open_or_throw(agg_path);
  out << agg_report.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + agg_path);
}

}  // namespace eqmest
