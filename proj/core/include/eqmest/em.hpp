#pragma once

#include <Eigen/Dense>

#include "eqmest/mle.hpp"
#include "eqmest/observation.hpp"
#include "eqmest/state_space.hpp"
#include "eqmest/trace.hpp"

namespace eqmest {

// Fully parametrised linear-Gaussian state-space model: A is a free r x r
// matrix, Q a free PSD matrix and R a scalar; C stays fixed at [1 0 ... 0]
// and the initial state at zero.
struct SsmParams {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Q;
  double R = 0.0;

  Eigen::Index r() const { return A.rows(); }
  Eigen::VectorXd flatten() const;  // [vec(A), vec(Q), R]
  StateSpaceModel to_state_space() const;
};

struct EmStepResult {
  SsmParams params;
  double loglik_before = 0.0;  // observed log-likelihood at the input params
  bool ridged = false;         // S00 needed ridge regularisation
};

// One EM sweep: Kalman smoothing under `params` (E-step, with
// update-skipping at missing indices), then the closed-form M-step
//   A <- S10 S00^{-1},  Q <- (S11 - A S10^T) / N,
//   R <- mean over observed t of (y_t - C m_t)^2 + C V_t C^T,
// where S00, S10, S11 are the smoothed cross-moment sums.
EmStepResult em_step(const SsmParams& params, const ObservationRecord& rec);

struct EmConfig {
  int max_iters = 100;
  StopRule stop = StopRule::parameter_change;
  double tol = 1e-6;
};

struct EmResult {
  SsmParams params;
  EstimationTrace trace;
};

EmResult em_run(const ObservationRecord& rec, const SsmParams& init,
                const EmConfig& cfg = {});

// Zero-fill the missing entries and run complete-data maximum likelihood.
MleResult naive_estimate(const ObservationRecord& rec, int p, int q);

// EM initialiser used by the experiment harness: the state-space
// realisation of `params` with R started at 1e-4 times the observed
// variance.
SsmParams initial_ssm_from(const ArmaParams& params,
                           const ObservationRecord& rec);

}  // namespace eqmest
