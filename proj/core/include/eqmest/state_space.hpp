#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "eqmest/arma.hpp"
#include "eqmest/observation.hpp"

namespace eqmest {

// Linear-Gaussian state-space model
//
//   x_t = A x_{t-1} + w_t,   w_t ~ N(0, Q),
//   y_t = C x_t + v_t,       v_t ~ N(0, R),   C = [1 0 ... 0],
//
// with known initial state x_0 = 0. When built from ArmaParams, A is the
// companion matrix of the AR polynomial, B holds the first r
// impulse-response weights and Q = sigma2 B B^T; B is left empty for
// models whose Q is specified directly (the EM baseline).
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::MatrixXd Q;
  double R = 0.0;

  Eigen::Index r() const { return A.rows(); }
};

// r = max(p, q+1); R = measurement_noise (0 for the exact ARMA law).
StateSpaceModel build_state_space(const ArmaParams& params,
                                  double measurement_noise = 0.0);

struct FilterState {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
};

struct FilterOptions {
  // Replace the known-initial-state convention P_0 = 0 with a diffuse
  // prior P_0 = diffuse_scale * I.
  bool diffuse_init = false;
  double diffuse_scale = 1e7;
};

struct FilterResult {
  double loglik = 0.0;
  std::vector<Eigen::VectorXd> filtered_means;      // x_{t|t}
  std::vector<Eigen::MatrixXd> filtered_covs;       // P_{t|t}
  std::vector<std::optional<double>> innovations;   // y_t - C x_{t|t-1}
  FilterState final_state;                          // x_{N|N}, P_{N|N}
};

// Predict/update recursion from x_0 = 0, P_0 = 0. Missing indices get a
// time update only and contribute no likelihood term:
// loglik = sum_{t in I_o} log N(y_t; C x_{t|t-1}, C P_{t|t-1} C^T + R).
FilterResult kalman_filter(const StateSpaceModel& model,
                           const ObservationRecord& rec,
                           const FilterOptions& opts = {});

struct SmootherOutput {
  std::vector<Eigen::VectorXd> smoothed_means;
  std::vector<Eigen::MatrixXd> smoothed_covs;
  std::vector<Eigen::MatrixXd> lag_one_covs;  // Cov[x_t, x_{t-1} | y_o]
  double loglik = 0.0;
};

// Rauch-style backward pass plus the lag-one covariance recursion needed
// by the EM M-step. Rank-deficient predicted covariances (exact ARMA
// models have R = 0 and rank-one Q) are handled with an eigenvalue
// pseudo-inverse.
SmootherOutput kalman_smooth(const StateSpaceModel& model,
                             const ObservationRecord& rec,
                             const FilterOptions& opts = {});

// One-step-ahead output predictions C x_{t|t-1} over a fully observed
// span, optionally continuing from a previous filter state (e.g. the end
// of the estimation span).
Eigen::VectorXd one_step_predictions(
    const StateSpaceModel& model, const Eigen::VectorXd& series,
    const std::optional<FilterState>& initial = std::nullopt);

}  // namespace eqmest
