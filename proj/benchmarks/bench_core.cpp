#include <benchmark/benchmark.h>

#include "eqmest/em.hpp"
#include "eqmest/eqm.hpp"
#include "eqmest/gaussian.hpp"
#include "eqmest/mle.hpp"
#include "eqmest/rng.hpp"
#include "eqmest/state_space.hpp"

namespace {

using namespace eqmest;

ObservationRecord make_record(const ArmaParams& params, Eigen::Index n,
                              double fraction) {
  const Eigen::VectorXd y = simulate_arma(params, static_cast<int>(n), 7);
  Rng rng(11);
  std::vector<Eigen::Index> missing;
  for (Eigen::Index t = 0; t < n; ++t)
    if (rng.uniform() < fraction) missing.push_back(t);
  return ObservationRecord::with_missing(y, missing);
}

void BM_JointCovariance(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(2, 2, 1.0, 3);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(joint_covariance(params, n));
}
BENCHMARK(BM_JointCovariance)->Arg(250)->Arg(500)->Arg(1000);

void BM_ConditionGaussian(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(2, 2, 1.0, 3);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto rec = make_record(params, n, 0.3);
  const Eigen::MatrixXd sigma = joint_covariance(params, n);
  for (auto _ : state)
    benchmark::DoNotOptimize(condition_gaussian(
        sigma, rec.observed_idx(), rec.missing_idx(), rec.observed_values()));
}
BENCHMARK(BM_ConditionGaussian)->Arg(250)->Arg(500)->Arg(1000);

void BM_KalmanFilter(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(2, 2, 1.0, 3);
  const auto rec = make_record(params, state.range(0), 0.3);
  const StateSpaceModel model = build_state_space(params);
  for (auto _ : state)
    benchmark::DoNotOptimize(kalman_filter(model, rec));
}
BENCHMARK(BM_KalmanFilter)->Arg(250)->Arg(1000);

void BM_KalmanSmooth(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(2, 2, 1.0, 3);
  const auto rec = make_record(params, state.range(0), 0.3);
  const StateSpaceModel model = build_state_space(params);
  for (auto _ : state)
    benchmark::DoNotOptimize(kalman_smooth(model, rec));
}
BENCHMARK(BM_KalmanSmooth)->Arg(250)->Arg(1000);

void BM_EmStep(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(2, 2, 1.0, 3);
  const auto rec = make_record(params, state.range(0), 0.3);
  const SsmParams init = initial_ssm_from(params, rec);
  for (auto _ : state)
    benchmark::DoNotOptimize(em_step(init, rec));
}
BENCHMARK(BM_EmStep)->Arg(250)->Arg(1000);

void BM_CompleteDataMleAr(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(3, 0, 1.0, 5);
  const Eigen::VectorXd y =
      simulate_arma(params, static_cast<int>(state.range(0)), 9);
  for (auto _ : state)
    benchmark::DoNotOptimize(complete_data_mle(y, 3, 0, ArmaParams{}));
}
BENCHMARK(BM_CompleteDataMleAr)->Arg(1000);

void BM_CompleteDataMleArma(benchmark::State& state) {
  const ArmaParams params = random_stable_arma(2, 2, 1.0, 5);
  const Eigen::VectorXd y =
      simulate_arma(params, static_cast<int>(state.range(0)), 9);
  ArmaParams init;
  init.phi = Eigen::VectorXd::Zero(2);
  init.lambda = Eigen::VectorXd::Zero(2);
  init.sigma2 = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(complete_data_mle(y, 2, 2, init));
}
BENCHMARK(BM_CompleteDataMleArma)->Arg(1000);

void BM_EqmIterationAr(benchmark::State& state) {
  // one outer-loop pass of the information-form AR path
  const ArmaParams params = random_stable_arma(3, 0, 1.0, 5);
  const auto rec = make_record(params, state.range(0), 0.3);
  EqmConfig cfg;
  cfg.max_iters = 1;
  cfg.stop = StopRule::fixed_iterations;
  const ArmaParams init = naive_estimate(rec, 3, 0).params;
  for (auto _ : state)
    benchmark::DoNotOptimize(eqm_run(rec, 3, 0, init, cfg));
}
BENCHMARK(BM_EqmIterationAr)->Arg(834);

}  // namespace

BENCHMARK_MAIN();
