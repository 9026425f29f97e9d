#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "eqmest/arma.hpp"
#include "eqmest/observation.hpp"

namespace eqmest {

// Covariance factorisation failed (matrix not positive definite). Carries
// a crude condition estimate from the pivoted LDL^T diagonal.
class SingularCovarianceError : public std::runtime_error {
 public:
  SingularCovarianceError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

// Generic numerical-degeneracy failure (non-positive innovation variance,
// degenerate conditional, singular regression).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unit lower-triangular banded Toeplitz operator T with T_ii = 1 and
// T_{i,i-k} = coeffs_k for 1 <= k <= len(coeffs), so that
// (T y)_t = y_t + sum_k coeffs_k y_{t-k} under zero initial conditions.
Eigen::MatrixXd banded_toeplitz_operator(const Eigen::VectorXd& coeffs,
                                         Eigen::Index n);

// Covariance of the transient ARMA realisation: sigma2 * G G^T with
// G = F^{-1} L, where F and L are the AR and MA banded operators.
// Equivalently the covariance of y solving F y = L e, e ~ N(0, sigma2 I).
Eigen::MatrixXd joint_covariance(const ArmaParams& params, Eigen::Index n);

// Largest dimension accepted by the dense covariance builder.
inline constexpr Eigen::Index kMaxDenseDimension = 4096;

// Conditional law of the missing block given the observed block of a
// zero-mean joint Gaussian.
struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_det_cov = 0.0;  // log |cov| from its Cholesky factor
};

// mean = Sigma_mo Sigma_oo^{-1} y_obs,
// cov  = Sigma_mm - Sigma_mo Sigma_oo^{-1} Sigma_om,
// computed through the Cholesky factor of Sigma_oo.
GaussianConditional condition_gaussian(
    const Eigen::MatrixXd& sigma, const std::vector<Eigen::Index>& observed_idx,
    const std::vector<Eigen::Index>& missing_idx, const Eigen::VectorXd& y_obs);

// log N(x; mean, cov) via Cholesky; never forms densities in linear space.
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov);

// Exact observed-data log-likelihood log N(y_o; 0, Sigma_oo), with Sigma
// the joint covariance restricted to the observed indices.
double observed_loglik_dense(const ArmaParams& params,
                             const ObservationRecord& rec);

namespace detail {

Eigen::MatrixXd select_submatrix(const Eigen::MatrixXd& m,
                                 const std::vector<Eigen::Index>& rows,
                                 const std::vector<Eigen::Index>& cols);

// Cholesky factor of a symmetric positive definite matrix; throws
// SingularCovarianceError when the factorisation fails.
Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const Eigen::MatrixXd& m,
                                              const char* context);

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt);

}  // namespace detail

}  // namespace eqmest
