#include <doctest.h>

#include <cmath>

#include "eqmest/gaussian.hpp"
#include "eqmest/mle.hpp"
#include "helpers.hpp"

using namespace eqmest;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("complete_data_loglik equals the dense joint density") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ArmaParams params = test::random_params(seed, 2, 2);
    const Eigen::VectorXd y = simulate_arma(params, 40, seed + 50);
    const double direct = complete_data_loglik(params, y);
    const double dense = mvn_logpdf(y, Eigen::VectorXd::Zero(40),
                                    joint_covariance(params, 40));
    CHECK(direct == doctest::Approx(dense).epsilon(1e-9));
  }
}

TEST_CASE("complete_data_mle AR(1) on a noiseless recursion") {
  // y_t = 0.5 y_{t-1} with y_1 = 1: the lag regression is exact, and the
  // transient likelihood charges the start-up value y_1 to the innovation
  // variance, so sigma2 = (1 + 0 + 0) / 3
  const Eigen::VectorXd y = vec({1.0, -0.5, 0.25});
  const MleResult fit = complete_data_mle(y, 1, 0, ArmaParams{});
  CHECK(fit.params.phi[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.params.sigma2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fit.converged);
}

TEST_CASE("complete_data_mle white noise variance") {
  const Eigen::VectorXd y = vec({1.0, -2.0, 3.0, 0.5});
  const MleResult fit = complete_data_mle(y, 0, 0, ArmaParams{});
  CHECK(fit.params.sigma2 == doctest::Approx(y.squaredNorm() / 4.0));
}

TEST_CASE("complete_data_mle is the transient-likelihood maximiser") {
  // the returned parameters zero the likelihood gradient, including the
  // concentrated sigma2 direction
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ArmaParams truth = test::random_params(seed, 2, 1);
    const Eigen::VectorXd y = simulate_arma(truth, 400, seed + 7);
    ArmaParams init = truth;
    init.phi *= 0.9;
    init.lambda *= 0.9;
    const MleResult fit = complete_data_mle(y, 2, 1, init);
    REQUIRE(fit.converged);

    const auto objective = [&](const Eigen::VectorXd& theta) {
      return complete_data_loglik(ArmaParams::unflatten(theta, 2, 1), y);
    };
    const Eigen::VectorXd grad =
        test::fd_gradient(objective, fit.params.flatten(), 1e-6);
    CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-3);
  }
}

TEST_CASE("complete_data_mle recovers the generating ARMA(2,2) parameters") {
  const ArmaParams truth{vec({-0.8897, 0.4858}), vec({-0.2279, 0.2488}), 1.0};
  const Eigen::VectorXd y = simulate_arma(truth, 10000, 123);
  ArmaParams init;
  init.phi = Eigen::VectorXd::Zero(2);
  init.lambda = Eigen::VectorXd::Zero(2);
  init.sigma2 = 1.0;
  const MleResult fit = complete_data_mle(y, 2, 2, init);
  REQUIRE(fit.converged);
  CHECK((fit.params.phi - truth.phi).lpNorm<Eigen::Infinity>() < 0.05);
  CHECK((fit.params.lambda - truth.lambda).lpNorm<Eigen::Infinity>() < 0.05);
  CHECK(fit.params.sigma2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("complete_data_mle edge cases") {
  CHECK_THROWS_AS(complete_data_mle(vec({1.0, 2.0}), 1, 0, ArmaParams{}),
                  std::invalid_argument);

  // all usable lags are zero while the target is not
  CHECK_THROWS_AS(complete_data_mle(vec({0.0, 0.0, 0.0, 1.0}), 2, 0, ArmaParams{}),
                  NumericalError);

  const MleResult zero = complete_data_mle(Eigen::VectorXd::Zero(10), 2, 1,
                                           ArmaParams{Eigen::VectorXd::Zero(2),
                                                      Eigen::VectorXd::Zero(1),
                                                      1.0});
  CHECK(zero.degenerate);
  CHECK(zero.params.sigma2 == 0.0);

  // estimates always come back stable and invertible
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ArmaParams truth = test::random_params(seed + 40, 2, 2);
    const Eigen::VectorXd y = simulate_arma(truth, 150, seed + 60);
    ArmaParams init;
    init.phi = Eigen::VectorXd::Zero(2);
    init.lambda = Eigen::VectorXd::Zero(2);
    init.sigma2 = 1.0;
    const MleResult fit = complete_data_mle(y, 2, 2, init);
    CHECK(stability_margin(fit.params.phi).stable);
    CHECK(stability_margin(fit.params.lambda).stable);
  }
}
