#include "eqmest/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "eqmest/rng.hpp"
#include "eqmest/state_space.hpp"

namespace eqmest {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::eqm:
      return "eqm";
    case Algorithm::em:
      return "em";
    case Algorithm::naive:
      return "naive";
  }
  return "unknown";
}

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::ar_sweep:
      return "ar_sweep";
    case Experiment::arma22_sweep:
      return "arma22_sweep";
    case Experiment::arma22_case:
      return "arma22_case";
  }
  return "unknown";
}

SweepConfig sweep_defaults(Experiment experiment) {
  SweepConfig cfg;
  cfg.experiment = experiment;
  switch (experiment) {
    case Experiment::ar_sweep:
      break;  // struct defaults
    case Experiment::arma22_sweep:
      cfg.n_processes = 50;
      cfg.series_length = 1500;
      cfg.sigma2 = 0.01;
      cfg.eqm_policy = {50, StopRule::fixed_iterations, 0.0};
      cfg.em_policy = {50, StopRule::fixed_iterations, 0.0};
      break;
    case Experiment::arma22_case:
      cfg.n_processes = 10;  // Monte Carlo masks of one fixed realisation
      cfg.series_length = 1500;
      cfg.sigma2 = 0.1;
      cfg.eqm_policy = {50, StopRule::loglik_change, 1e-6};
      cfg.em_policy = {50, StopRule::loglik_change, 1e-6};
      cfg.case_phi = Eigen::VectorXd(2);
      cfg.case_phi << -0.8897, 0.4858;
      cfg.case_lambda = Eigen::VectorXd(2);
      cfg.case_lambda << -0.2279, 0.2488;
      break;
  }
  return cfg;
}

double fit_metric(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("fit_metric: length mismatch");
  if (y_true.size() < 2) throw std::invalid_argument("fit_metric: too short");
  const double denom = (y_true.array() - y_true.mean()).matrix().norm();
  if (denom == 0.0)
    throw std::invalid_argument("fit_metric: constant reference series");
  return 100.0 * (1.0 - (y_true - y_pred).norm() / denom);
}

namespace {

void validate_config(const SweepConfig& cfg) {
  if (cfg.n_processes < 1)
    throw std::invalid_argument("run_experiment: n_processes must be >= 1");
  if (cfg.series_length < 30)
    throw std::invalid_argument("run_experiment: series_length must be >= 30");
  if (cfg.missing_fractions.empty())
    throw std::invalid_argument("run_experiment: no missing fractions");
  for (double f : cfg.missing_fractions)
    if (!(f >= 0.0 && f <= 0.5))
      throw std::invalid_argument(
          "run_experiment: missing fractions must lie in [0, 0.5]");
  if (cfg.jobs < 1)
    throw std::invalid_argument("run_experiment: jobs must be >= 1");
  if (!(cfg.sigma2 > 0.0))
    throw std::invalid_argument("run_experiment: sigma2 must be > 0");
  if (cfg.experiment == Experiment::ar_sweep &&
      (cfg.p_min < 1 || cfg.p_max < cfg.p_min))
    throw std::invalid_argument("run_experiment: invalid order range");
}

// seed words for the documented splitting rule
// hash(master, process, fraction index, purpose)
enum SeedPurpose : std::uint64_t {
  kSeriesSeed = 1,
  kOrderSeed = 2,
  kMaskSeed = 3,
  kAlgorithmSeedBase = 10,
};

struct ProcessSetup {
  ArmaParams params;
  Eigen::VectorXd series;
  int p = 0;
  int q = 0;
};

ProcessSetup build_process(const SweepConfig& cfg, int process_id) {
  ProcessSetup setup;
  switch (cfg.experiment) {
    case Experiment::ar_sweep: {
      Rng order_rng(derive_seed(cfg.master_seed, process_id, 0, kOrderSeed));
      setup.p = order_rng.uniform_int(cfg.p_min, cfg.p_max);
      setup.q = 0;
      setup.params = random_stable_arma(
          setup.p, 0, cfg.sigma2,
          derive_seed(cfg.master_seed, process_id, 1, kOrderSeed));
      setup.series = simulate_arma(
          setup.params, cfg.series_length,
          derive_seed(cfg.master_seed, process_id, 0, kSeriesSeed));
      break;
    }
    case Experiment::arma22_sweep: {
      setup.p = cfg.fixed_p;
      setup.q = cfg.fixed_q;
      setup.params = random_stable_arma(
          setup.p, setup.q, cfg.sigma2,
          derive_seed(cfg.master_seed, process_id, 1, kOrderSeed));
      setup.series = simulate_arma(
          setup.params, cfg.series_length,
          derive_seed(cfg.master_seed, process_id, 0, kSeriesSeed));
      break;
    }
    case Experiment::arma22_case: {
      setup.p = static_cast<int>(cfg.case_phi.size());
      setup.q = static_cast<int>(cfg.case_lambda.size());
      setup.params = ArmaParams{cfg.case_phi, cfg.case_lambda, cfg.sigma2};
      // one shared realisation; process_id only varies the mask
      setup.series =
          simulate_arma(setup.params, cfg.series_length,
                        derive_seed(cfg.master_seed, 0, 0, kSeriesSeed));
      break;
    }
  }
  return setup;
}

double predictive_fit(const StateSpaceModel& model,
                      const ObservationRecord& estimation,
                      const Eigen::VectorXd& validation) {
  const FilterResult filt = kalman_filter(model, estimation);
  const Eigen::VectorXd preds =
      one_step_predictions(model, validation, filt.final_state);
  return fit_metric(validation, preds);
}

RunResult failed_row(int process_id, Algorithm algorithm, double fraction,
                     const std::string& message) {
  RunResult row;
  row.process_id = process_id;
  row.algorithm = algorithm;
  row.missing_fraction = fraction;
  row.fit = std::numeric_limits<double>::quiet_NaN();
  row.final_loglik = std::numeric_limits<double>::quiet_NaN();
  row.termination = Termination::failed;
  row.error = message;
  return row;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void run_cell(const SweepConfig& cfg, const ProcessSetup& setup,
              int process_id, double fraction, std::uint64_t mask_seed,
              RunResult* out) {
  ExperimentProblem problem = make_problem(setup.series, fraction, mask_seed);
  problem.true_params = setup.params;
  problem.p = setup.p;
  problem.q = setup.q;
  const ObservationRecord& rec = problem.estimation;
  const int p = setup.p;
  const int q = setup.q;

  // the naive fit seeds all three estimators
  MleResult naive;
  bool have_naive = false;
  std::string naive_error;
  double naive_seconds = 0.0;
  try {
    const auto t0 = Clock::now();
    naive = naive_estimate(rec, p, q);
    naive_seconds = seconds_since(t0);
    have_naive = true;
  } catch (const std::exception& e) {
    naive_error = e.what();
  }

  for (int a = 0; a < 3; ++a) {
    const auto algorithm = static_cast<Algorithm>(a);
    RunResult& row = out[a];
    if (!have_naive) {
      row = failed_row(process_id, algorithm, fraction,
                       "naive initialiser failed: " + naive_error);
      continue;
    }
    try {
      row.process_id = process_id;
      row.algorithm = algorithm;
      row.missing_fraction = fraction;
      switch (algorithm) {
        case Algorithm::naive: {
          row.wall_time_s = naive_seconds;
          row.iterations = 1;
          row.termination = Termination::param_converged;
          row.final_loglik = observed_loglik_dense(naive.params, rec);
          row.fit = predictive_fit(build_state_space(naive.params, 0.0), rec,
                                   problem.validation);
          break;
        }
        case Algorithm::eqm: {
          EqmConfig eqm_cfg;
          eqm_cfg.theta0 = cfg.theta0;
          eqm_cfg.max_iters = cfg.eqm_policy.max_iters;
          eqm_cfg.stop = cfg.eqm_policy.stop;
          eqm_cfg.tol = cfg.eqm_policy.tol;
          const auto t0 = Clock::now();
          const EqmResult fit = eqm_run(rec, p, q, naive.params, eqm_cfg);
          row.wall_time_s = seconds_since(t0);
          if (fit.trace.termination == Termination::failed)
            throw NumericalError(fit.trace.error);
          row.iterations = fit.trace.iteration_count();
          row.clamp_count = fit.trace.clamp_count;
          row.termination = fit.trace.termination;
          row.final_loglik = fit.trace.iterations.back().loglik;
          row.fit = predictive_fit(build_state_space(fit.params, 0.0), rec,
                                   problem.validation);
          break;
        }
        case Algorithm::em: {
          EmConfig em_cfg;
          em_cfg.max_iters = cfg.em_policy.max_iters;
          em_cfg.stop = cfg.em_policy.stop;
          em_cfg.tol = cfg.em_policy.tol;
          const SsmParams init = initial_ssm_from(naive.params, rec);
          const auto t0 = Clock::now();
          const EmResult fit = em_run(rec, init, em_cfg);
          row.wall_time_s = seconds_since(t0);
          if (fit.trace.termination == Termination::failed)
            throw NumericalError(fit.trace.error);
          row.iterations = fit.trace.iteration_count();
          row.termination = fit.trace.termination;
          row.final_loglik = fit.trace.iterations.back().loglik;
          row.fit =
              predictive_fit(fit.params.to_state_space(), rec, problem.validation);
          break;
        }
      }
    } catch (const std::exception& e) {
      row = failed_row(process_id, algorithm, fraction, e.what());
    }
  }
}

}  // namespace

std::vector<RunResult> run_experiment(const SweepConfig& cfg) {
  validate_config(cfg);

  const int n_fractions = static_cast<int>(cfg.missing_fractions.size());
  const int n_cells = cfg.n_processes * n_fractions;
  std::vector<RunResult> results(static_cast<std::size_t>(n_cells) * 3);

  const auto run_task = [&](int cell, const ProcessSetup& setup) {
    const int process_id = cell / n_fractions;
    const int f_idx = cell % n_fractions;
    const double fraction = cfg.missing_fractions[static_cast<std::size_t>(f_idx)];
    const std::uint64_t mask_seed =
        derive_seed(cfg.master_seed, process_id, f_idx, kMaskSeed);
    run_cell(cfg, setup, process_id, fraction, mask_seed,
             &results[static_cast<std::size_t>(cell) * 3]);
  };

  if (cfg.jobs == 1) {
    for (int process_id = 0; process_id < cfg.n_processes; ++process_id) {
      const ProcessSetup setup = build_process(cfg, process_id);
      for (int f_idx = 0; f_idx < n_fractions; ++f_idx)
        run_task(process_id * n_fractions + f_idx, setup);
    }
    return results;
  }

  // worker pool over cells; results land in preassigned slots, so the
  // output order is independent of scheduling
  std::atomic<int> next{0};
  const int n_workers = std::min(cfg.jobs, n_cells);
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (int cell = next.fetch_add(1); cell < n_cells;
           cell = next.fetch_add(1)) {
        const ProcessSetup setup = build_process(cfg, cell / n_fractions);
        run_task(cell, setup);
      }
    });
  }
  for (auto& worker : workers) worker.join();
  return results;
}

}  // namespace eqmest
