#pragma once

#include <Eigen/Dense>

#include "eqmest/arma.hpp"

namespace eqmest {

struct MleResult {
  ArmaParams params;
  bool converged = true;   // optimiser reached its tolerance
  bool degenerate = false; // zero residual variance
};

// Innovations e = L^{-1} F y of the transient ARMA model via the recursion
// e_t = y_t + sum_k phi_k y_{t-k} - sum_k lambda_k e_{t-k}, zero-padded
// before t = 0.
Eigen::VectorXd arma_residuals(const ArmaParams& params,
                               const Eigen::VectorXd& y);

// Exact complete-data log-likelihood log N(y; 0, joint_covariance). The
// AR/MA operators are unit triangular, so this reduces to
// -n/2 log(2 pi sigma2) - |e|^2 / (2 sigma2).
double complete_data_loglik(const ArmaParams& params, const Eigen::VectorXd& y);

// Maximises the complete-data log-likelihood over (phi, lambda, sigma2)
// with sigma2 concentrated out analytically (sigma2 = |e|^2 / n).
//
// q = 0 reduces to linear least squares on the zero-padded lag regression;
// the general case runs Levenberg-Marquardt on the innovation residuals
// with iterates reflected into the stable/invertible region.
MleResult complete_data_mle(const Eigen::VectorXd& y, int p, int q,
                            const ArmaParams& init);

}  // namespace eqmest
