#include <doctest.h>

#include <cmath>

#include "eqmest/em.hpp"
#include "eqmest/eqm.hpp"
#include "eqmest/gaussian.hpp"
#include "eqmest/harness.hpp"
#include "helpers.hpp"

using namespace eqmest;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

struct Instance {
  ObservationRecord rec;
  SsmParams init;
};

Instance random_instance(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 3));
  const int p = rng.uniform_int(1, 2);
  const int q = rng.uniform_int(0, 2);
  const ArmaParams truth = test::random_params(seed + 11, p, q);
  const Eigen::VectorXd y =
      simulate_arma(truth, 60 + rng.uniform_int(0, 60), seed + 12);
  ObservationRecord rec =
      test::masked_record(y, 0.35 * rng.uniform(), seed + 13);
  const MleResult naive = naive_estimate(rec, p, q);
  SsmParams init = initial_ssm_from(naive.params, rec);
  return {std::move(rec), std::move(init)};
}

// expected complete-data log-likelihood under the smoothed posterior
// (the intermediate quantity), evaluated from the same smoothed moments
// the M-step consumes. The M-step preserves rank(Q) -- the smoothed
// process-noise moments live on its range -- so the transition term uses
// the pseudo-determinant and pseudo-inverse on that common support.
double q_function(const SsmParams& candidate, const SsmParams& current,
                  const ObservationRecord& rec) {
  const SmootherOutput smooth = kalman_smooth(current.to_state_space(), rec);
  const Eigen::Index r = candidate.r();
  const Eigen::Index n = rec.size();

  Eigen::MatrixXd s00 = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd s10 = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd s11 = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const Eigen::MatrixXd second =
        smooth.smoothed_covs[i] +
        smooth.smoothed_means[i] * smooth.smoothed_means[i].transpose();
    s11 += second;
    if (t < n - 1) s00 += second;
    if (t >= 1)
      s10 += smooth.lag_one_covs[i] + smooth.smoothed_means[i] *
                                          smooth.smoothed_means[i - 1].transpose();
  }

  const Eigen::MatrixXd transition_moment =
      s11 - candidate.A * s10.transpose() - s10 * candidate.A.transpose() +
      candidate.A * s00 * candidate.A.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(candidate.Q);
  const double max_eig = eig.eigenvalues().maxCoeff();
  REQUIRE(max_eig > 0.0);
  double log_pdet = 0.0;
  Eigen::Index rank = 0;
  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double value = eig.eigenvalues()[i];
    if (value > 1e-10 * max_eig) {
      log_pdet += std::log(value);
      pinv += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose() /
              value;
      ++rank;
    }
  }
  constexpr double kLogTwoPi = 1.8378770664093454836;

  double value =
      -0.5 * (static_cast<double>(n) *
                  (static_cast<double>(rank) * kLogTwoPi + log_pdet) +
              (pinv * transition_moment).trace());
  for (Eigen::Index t : rec.observed_idx()) {
    const auto i = static_cast<std::size_t>(t);
    const double residual = rec.value_at(t) - smooth.smoothed_means[i][0];
    value += -0.5 * (kLogTwoPi + std::log(candidate.R) +
                     (residual * residual + smooth.smoothed_covs[i](0, 0)) /
                         candidate.R);
  }
  return value;
}

}  // namespace

TEST_CASE("em_step increases the intermediate quantity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed);
    SsmParams current = em_step(inst.init, inst.rec).params;
    const SsmParams next = em_step(current, inst.rec).params;
    const double q_new = q_function(next, current, inst.rec);
    const double q_old = q_function(current, current, inst.rec);
    CHECK(q_new >= q_old - 1e-9 * std::abs(q_old));
  }
}

TEST_CASE("em_step monotonically increases the observed log-likelihood") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Instance inst = random_instance(seed + 100);
    SsmParams params = inst.init;
    double previous = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
      const EmStepResult step = em_step(params, inst.rec);
      CHECK(step.loglik_before >= previous - 1e-8);
      previous = step.loglik_before;
      params = step.params;

      // the M-step output stays symmetric PSD
      CHECK((params.Q - params.Q.transpose()).lpNorm<Eigen::Infinity>() <
            1e-10 * (1.0 + params.Q.lpNorm<Eigen::Infinity>()));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(params.Q);
      CHECK(eig.eigenvalues().minCoeff() >
            -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff()));
    }
  }
}

TEST_CASE("em_step fixed point leaves the log-likelihood unchanged") {
  const Instance inst = random_instance(4242);
  // drive EM very close to a stationary point first
  EmConfig cfg;
  cfg.max_iters = 3000;
  cfg.tol = 1e-11;
  const EmResult run = em_run(inst.rec, inst.init, cfg);
  const EmStepResult step = em_step(run.params, inst.rec);
  if ((step.params.flatten() - run.params.flatten()).norm() < 1e-6) {
    const EmStepResult next = em_step(step.params, inst.rec);
    CHECK(std::abs(next.loglik_before - step.loglik_before) < 1e-8);
  }
}

TEST_CASE("em_run with no missing AR(1) data recovers the direct MLE") {
  const ArmaParams truth{vec({-0.55}), {}, 1.0};
  const Eigen::VectorXd y = simulate_arma(truth, 120, 77);
  const auto rec = ObservationRecord::fully_observed(y);
  const MleResult direct = complete_data_mle(y, 1, 0, ArmaParams{});
  const double direct_loglik = complete_data_loglik(direct.params, y);

  // start away from the answer; a noise-free observation equation makes
  // the EM fixed point coincide with the exact AR likelihood maximiser
  SsmParams init = initial_ssm_from(direct.params, rec);
  init.A(0, 0) = 0.1;
  init.Q(0, 0) = 2.0;
  init.R = 0.0;
  EmConfig cfg;
  cfg.max_iters = 500;
  cfg.tol = 1e-13;
  const EmResult run = em_run(rec, init, cfg);
  const double em_loglik = run.trace.iterations.back().loglik;
  CHECK(std::abs(em_loglik - direct_loglik) < 1e-4);
}

TEST_CASE("em_run converges to a stationary point of the observed loglik") {
  // observation noise keeps the likelihood maximum away from the R = 0
  // boundary, where EM would only crawl at rate 1/k
  const ArmaParams truth{vec({-0.7}), {}, 1.0};
  Rng noise(99);
  Eigen::VectorXd y = simulate_arma(truth, 150, 42);
  for (Eigen::Index t = 0; t < y.size(); ++t) y[t] += 0.4 * noise.gaussian();
  std::vector<std::optional<double>> values(static_cast<std::size_t>(y.size()));
  for (Eigen::Index t = 0; t < y.size(); ++t)
    values[static_cast<std::size_t>(t)] = y[t];
  for (Eigen::Index t = 10; t < y.size(); t += 7)
    values[static_cast<std::size_t>(t)].reset();
  const ObservationRecord rec{values};

  SsmParams init = initial_ssm_from(naive_estimate(rec, 1, 0).params, rec);
  const Eigen::VectorXd y_obs = rec.observed_values();
  init.R = 0.25 * (y_obs.array() - y_obs.mean()).square().mean();

  EmConfig cfg;
  cfg.max_iters = 5000;
  cfg.tol = 1e-13;
  const EmResult run = em_run(rec, init, cfg);
  REQUIRE(run.trace.termination == Termination::param_converged);

  const Eigen::Index r = run.params.r();
  const auto unflatten = [&](const Eigen::VectorXd& theta) {
    SsmParams params;
    params.A = Eigen::Map<const Eigen::MatrixXd>(theta.data(), r, r);
    params.Q = Eigen::Map<const Eigen::MatrixXd>(theta.data() + r * r, r, r);
    params.R = theta[2 * r * r];
    return params;
  };
  const auto objective = [&](const Eigen::VectorXd& theta) {
    return kalman_filter(unflatten(theta).to_state_space(), rec).loglik;
  };
  const Eigen::VectorXd grad =
      test::fd_gradient(objective, run.params.flatten(), 1e-5);
  CHECK(grad.norm() < 1e-2);
}

TEST_CASE("em_run fixed-iteration mode runs exactly max_iters sweeps") {
  const Instance inst = random_instance(31337);
  EmConfig cfg;
  cfg.stop = StopRule::fixed_iterations;
  cfg.max_iters = 50;
  const EmResult run = em_run(inst.rec, inst.init, cfg);
  CHECK(run.trace.iteration_count() == 50);
  CHECK(run.trace.termination == Termination::max_iters);

  // determinism
  const EmResult again = em_run(inst.rec, inst.init, cfg);
  CHECK(again.params.flatten() == run.params.flatten());
}

TEST_CASE("naive_estimate reductions") {
  const ArmaParams truth = test::random_params(55, 2, 0);
  const Eigen::VectorXd y = simulate_arma(truth, 90, 56);
  const auto rec = ObservationRecord::fully_observed(y);
  const MleResult direct = complete_data_mle(y, 2, 0, ArmaParams{});
  const MleResult naive = naive_estimate(rec, 2, 0);
  CHECK(naive.params.flatten() == direct.params.flatten());

  std::vector<std::optional<double>> zeros(12, 0.0);
  zeros[3].reset();
  const MleResult degenerate = naive_estimate(ObservationRecord{zeros}, 1, 0);
  CHECK(degenerate.degenerate);
  CHECK(degenerate.params.sigma2 == 0.0);
}

TEST_CASE("naive fits fall behind EqM at heavy missingness") {
  double naive_mean = 0.0, eqm_mean = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ArmaParams truth = test::random_params(seed + 600, 2, 0, 1.0, 1.0);
    const Eigen::VectorXd y = simulate_arma(truth, 300, seed + 601);
    const auto problem = make_problem(y, 0.5, seed + 602);
    const auto& rec = problem.estimation;

    const MleResult naive = naive_estimate(rec, 2, 0);
    const EqmResult eqm = eqm_run(rec, 2, 0, naive.params, {});
    REQUIRE(eqm.trace.termination != Termination::failed);

    const auto fit_of = [&](const ArmaParams& params) {
      const auto model = build_state_space(params, 0.0);
      const auto filt = kalman_filter(model, rec);
      return fit_metric(problem.validation,
                        one_step_predictions(model, problem.validation,
                                             filt.final_state));
    };
    naive_mean += fit_of(naive.params);
    eqm_mean += fit_of(eqm.params);
    ++count;
  }
  CHECK(count == 5);
  CHECK(naive_mean / count < eqm_mean / count);
}
