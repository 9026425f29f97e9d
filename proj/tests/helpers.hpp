#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <vector>

#include "eqmest/arma.hpp"
#include "eqmest/observation.hpp"
#include "eqmest/rng.hpp"

namespace eqmest::test {

// Random stable/invertible parameters with sigma2 drawn from [lo, hi].
inline ArmaParams random_params(std::uint64_t seed, int p, int q,
                                double sigma2_lo = 0.5, double sigma2_hi = 1.5) {
  Rng rng(derive_seed(seed, 17));
  const double sigma2 = rng.uniform_in(sigma2_lo, sigma2_hi);
  return random_stable_arma(p, q, sigma2, derive_seed(seed, 23));
}

// Masks floor(fraction * n) indices of a series drawn without replacement.
inline ObservationRecord masked_record(const Eigen::VectorXd& series,
                                       double fraction, std::uint64_t seed) {
  const Eigen::Index n = series.size();
  const auto k = static_cast<Eigen::Index>(fraction * static_cast<double>(n) + 1e-9);
  Rng rng(seed);
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j =
        i + static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Eigen::Index> missing(pool.begin(), pool.begin() + k);
  std::sort(missing.begin(), missing.end());
  return ObservationRecord::with_missing(series, missing);
}

// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    grad[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return grad;
}

}  // namespace eqmest::test
