#pragma once

#include <Eigen/Dense>

#include "eqmest/arma.hpp"
#include "eqmest/gaussian.hpp"
#include "eqmest/observation.hpp"
#include "eqmest/trace.hpp"

namespace eqmest {

struct EqmConfig {
  double theta0 = 1.0;  // equalisation constant, unity without loss of generality
  int max_iters = 100;
  StopRule stop = StopRule::parameter_change;
  double tol = 1e-6;

  // The conditional law of the missing block can be formed either from the
  // dense joint covariance or, for pure AR models, from the banded
  // precision matrix F^T F / sigma2. Both routes give identical values;
  // the information route only touches the missing block and is the
  // production path for q = 0.
  enum class Conditioning { automatic, dense, information };
  Conditioning conditioning = Conditioning::automatic;
};

struct EqualisationResult {
  Eigen::VectorXd y_m;
  bool clamped = false;  // radicand was negative and y_m fell back to the mean
};

// Deterministic missing-data estimate
//   y_m = mean + cov_{1,.} sqrt((log theta0 - log|cov|) / cov_{1,1}),
// placed so that its conditional density equals
// (2 pi)^{-m/2} theta0^{-1/2} whenever the radicand is nonnegative.
EqualisationResult equalisation_estimate(const GaussianConditional& cond,
                                         double theta0);

struct EqmResult {
  ArmaParams params;
  EstimationTrace trace;
};

// Equalisation-maximisation outer loop: condition the joint Gaussian on
// the observed data at the current parameters, equalise the missing block,
// and re-estimate by complete-data maximum likelihood. The trace records
// every iterate with its observed-data log-likelihood; with no missing
// data the loop reduces to a single complete-data fit.
EqmResult eqm_run(const ObservationRecord& rec, int p, int q,
                  const ArmaParams& init, const EqmConfig& cfg = {});

}  // namespace eqmest
