#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "eqmest/eqm.hpp"
#include "eqmest/em.hpp"
#include "eqmest/observation.hpp"
#include "eqmest/trace.hpp"

namespace eqmest {

enum class Algorithm { eqm, em, naive };
const char* to_string(Algorithm a);

enum class Experiment { ar_sweep, arma22_sweep, arma22_case };
const char* to_string(Experiment e);

struct IterationPolicy {
  int max_iters = 100;
  StopRule stop = StopRule::parameter_change;
  double tol = 1e-6;
};

// One simulation study: a batch of random processes (or Monte Carlo masks
// of one fixed realisation for arma22_case), a grid of missing fractions,
// and the three estimators run on every cell.
struct SweepConfig {
  Experiment experiment = Experiment::ar_sweep;
  int n_processes = 20;
  int series_length = 1250;
  double sigma2 = 1.0;
  std::vector<double> missing_fractions = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

  // ar_sweep draws the order uniformly from [p_min, p_max]; the ARMA
  // presets use fixed orders
  int p_min = 1;
  int p_max = 5;
  int fixed_p = 2;
  int fixed_q = 2;

  IterationPolicy eqm_policy{100, StopRule::parameter_change, 1e-6};
  IterationPolicy em_policy{100, StopRule::parameter_change, 1e-6};
  double theta0 = 1.0;

  std::uint64_t master_seed = 1;
  int jobs = 1;

  // fixed coefficients for the arma22_case preset
  Eigen::VectorXd case_phi;
  Eigen::VectorXd case_lambda;
};

// Desk-scale defaults for each study; full-scale counts are reachable by
// overriding the fields.
SweepConfig sweep_defaults(Experiment experiment);

struct RunResult {
  int process_id = 0;
  Algorithm algorithm = Algorithm::eqm;
  double missing_fraction = 0.0;
  double fit = 0.0;          // percent, <= 100
  double wall_time_s = 0.0;  // estimator call only
  int iterations = 1;
  double final_loglik = 0.0;
  int clamp_count = 0;
  Termination termination = Termination::param_converged;
  std::string error;  // non-empty for failed runs
};

// 100 * (1 - |y_true - y_pred|_2 / |y_true - mean(y_true)|_2)
double fit_metric(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// Runs every (process, fraction, algorithm) cell; failures are recorded in
// the result row and never abort the sweep. Deterministic under
// master_seed regardless of the worker count.
std::vector<RunResult> run_experiment(const SweepConfig& cfg);

enum class ReportFormat { csv, json };

// Writes the per-run rows to `path` and (algorithm, fraction) aggregates
// with 95% normal-approximation half-widths to the same path with an
// ".agg" suffix before the extension.
void emit_report(const std::vector<RunResult>& results, const SweepConfig& cfg,
                 ReportFormat format, const std::string& path);

}  // namespace eqmest
