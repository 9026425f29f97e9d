#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace eqmest {

// ARMA(p, q) parameters under the sign convention
//
//   y_t + phi_1 y_{t-1} + ... + phi_p y_{t-p}
//       = e_t + lambda_1 e_{t-1} + ... + lambda_q e_{t-q},
//
// with e_t ~ N(0, sigma2). Zero initial conditions (y_t = e_t = 0 for
// t <= 0) are assumed throughout the library, so every joint law below
// describes the transient process started at rest.
struct ArmaParams {
  Eigen::VectorXd phi;     // AR coefficients phi_1..phi_p
  Eigen::VectorXd lambda;  // MA coefficients lambda_1..lambda_q
  double sigma2 = 1.0;     // innovation variance

  int p() const { return static_cast<int>(phi.size()); }
  int q() const { return static_cast<int>(lambda.size()); }

  bool is_stable() const;
  bool is_invertible() const;

  // [phi_1..phi_p, lambda_1..lambda_q, sigma2]
  Eigen::VectorXd flatten() const;
  static ArmaParams unflatten(const Eigen::VectorXd& v, int p, int q);
};

// Throws std::invalid_argument on non-finite coefficients or sigma2 < 0.
void validate(const ArmaParams& params);

struct StabilityReport {
  bool stable = false;
  double min_root_modulus = 0.0;
};

// Roots of 1 + c_1 z + ... + c_d z^d via the companion matrix. Trailing
// zero coefficients are trimmed; a constant polynomial has no roots.
Eigen::VectorXcd polynomial_roots(const Eigen::VectorXd& coeffs);

// Minimum modulus over the roots of 1 + c_1 z + ... + c_d z^d (infinity
// when there are none); stable <=> the minimum modulus exceeds 1.
StabilityReport stability_margin(const Eigen::VectorXd& coeffs);

// Impulse-response weights of the transfer function lambda(z)/phi(z):
// psi_0 = 1, psi_k = lambda_k - sum_{j=1..k} phi_j psi_{k-j}, with
// lambda_k = 0 for k > q and phi_j = 0 for j > p.
Eigen::VectorXd psi_weights(const ArmaParams& params, int count);

// Applies the ARMA recursion to a given innovation sequence under zero
// initial conditions; simulate_arma draws the innovations i.i.d. Gaussian.
Eigen::VectorXd arma_filter(const ArmaParams& params,
                            const Eigen::VectorXd& innovations);

Eigen::VectorXd simulate_arma(const ArmaParams& params, int n,
                              std::uint64_t seed);

// Draws parameters whose AR polynomial is stable and MA polynomial is
// invertible by sampling root moduli uniformly in [1.05, 3] with a random
// real/conjugate-pair mix.
ArmaParams random_stable_arma(int p, int q, double sigma2,
                              std::uint64_t seed);

// Reflects any root with modulus < 1 across the unit circle
// (z -> 1 / conj(z)) and pushes near-unit roots outward so that all roots
// of the returned polynomial have modulus >= 1 + margin.
Eigen::VectorXd reflect_to_stable(const Eigen::VectorXd& coeffs,
                                  double margin = 1e-3);

}  // namespace eqmest
