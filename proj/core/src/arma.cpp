#include "eqmest/arma.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "eqmest/rng.hpp"

namespace eqmest {

namespace {

// Coefficient vector with exact trailing zeros removed.
Eigen::VectorXd trim_trailing_zeros(const Eigen::VectorXd& coeffs) {
  Eigen::Index d = coeffs.size();
  while (d > 0 && coeffs[d - 1] == 0.0) --d;
  return coeffs.head(d);
}

// Expands prod_i (1 - z / roots_i) into 1 + c_1 z + ... + c_d z^d.
Eigen::VectorXd coefficients_from_roots(
    const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    const std::complex<double> a = -1.0 / r;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] += poly[i] * a;
    }
    poly = std::move(next);
  }
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(poly.size()) - 1);
  for (Eigen::Index k = 0; k < coeffs.size(); ++k)
    coeffs[k] = poly[static_cast<std::size_t>(k) + 1].real();
  return coeffs;
}

}  // namespace

bool ArmaParams::is_stable() const { return stability_margin(phi).stable; }

bool ArmaParams::is_invertible() const {
  return stability_margin(lambda).stable;
}

Eigen::VectorXd ArmaParams::flatten() const {
  Eigen::VectorXd v(phi.size() + lambda.size() + 1);
  v << phi, lambda, sigma2;
  return v;
}

ArmaParams ArmaParams::unflatten(const Eigen::VectorXd& v, int p, int q) {
  if (v.size() != p + q + 1)
    throw std::invalid_argument("unflatten: size mismatch");
  ArmaParams params;
  params.phi = v.head(p);
  params.lambda = v.segment(p, q);
  params.sigma2 = v[p + q];
  return params;
}

void validate(const ArmaParams& params) {
  if (!params.phi.allFinite() || !params.lambda.allFinite())
    throw std::invalid_argument("ArmaParams: non-finite coefficients");
  if (!std::isfinite(params.sigma2) || params.sigma2 < 0.0)
    throw std::invalid_argument("ArmaParams: sigma2 must be finite and >= 0");
}

Eigen::VectorXcd polynomial_roots(const Eigen::VectorXd& coeffs) {
  if (!coeffs.allFinite())
    throw std::invalid_argument("polynomial_roots: non-finite coefficients");
  const Eigen::VectorXd c = trim_trailing_zeros(coeffs);
  const Eigen::Index d = c.size();
  if (d == 0) return Eigen::VectorXcd();

  // companion matrix of the monic polynomial z^d + a_{d-1} z^{d-1} + ... + a_0
  // with a_k = c_k / c_d (k >= 1) and a_0 = 1 / c_d
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  companion(0, d - 1) = -1.0 / c[d - 1];
  for (Eigen::Index i = 1; i < d; ++i)
    companion(i, d - 1) = -c[i - 1] / c[d - 1];

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues();
}

StabilityReport stability_margin(const Eigen::VectorXd& coeffs) {
  const Eigen::VectorXcd roots = polynomial_roots(coeffs);
  StabilityReport report;
  if (roots.size() == 0) {
    report.min_root_modulus = std::numeric_limits<double>::infinity();
    report.stable = true;
    return report;
  }
  report.min_root_modulus = roots.array().abs().minCoeff();
  report.stable = report.min_root_modulus > 1.0;
  return report;
}

Eigen::VectorXd psi_weights(const ArmaParams& params, int count) {
  if (count < 1) throw std::invalid_argument("psi_weights: count must be >= 1");
  validate(params);
  const int p = params.p();
  const int q = params.q();
  Eigen::VectorXd psi(count);
  psi[0] = 1.0;
  for (int k = 1; k < count; ++k) {
    double value = k <= q ? params.lambda[k - 1] : 0.0;
    for (int j = 1; j <= std::min(k, p); ++j)
      value -= params.phi[j - 1] * psi[k - j];
    psi[k] = value;
  }
  return psi;
}

Eigen::VectorXd arma_filter(const ArmaParams& params,
                            const Eigen::VectorXd& innovations) {
  validate(params);
  const int p = params.p();
  const int q = params.q();
  const Eigen::Index n = innovations.size();
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double value = innovations[t];
    for (int k = 1; k <= q && t - k >= 0; ++k)
      value += params.lambda[k - 1] * innovations[t - k];
    for (int k = 1; k <= p && t - k >= 0; ++k)
      value -= params.phi[k - 1] * y[t - k];
    y[t] = value;
  }
  return y;
}

Eigen::VectorXd simulate_arma(const ArmaParams& params, int n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_arma: n must be >= 1");
  validate(params);
  Rng rng(seed);
  const double scale = std::sqrt(params.sigma2);
  Eigen::VectorXd e(n);
  for (int t = 0; t < n; ++t) e[t] = scale * rng.gaussian();
  return arma_filter(params, e);
}

namespace {

// Random roots with moduli in [1.05, 3]: comfortably outside the unit
// circle, mixing real roots and conjugate pairs.
std::vector<std::complex<double>> sample_roots(Rng& rng, int degree) {
  std::vector<std::complex<double>> roots;
  int remaining = degree;
  while (remaining > 0) {
    const double modulus = rng.uniform_in(1.05, 3.0);
    if (remaining >= 2 && rng.uniform() < 0.5) {
      const double angle = rng.uniform_in(0.0, std::acos(-1.0));
      const std::complex<double> root = std::polar(modulus, angle);
      roots.push_back(root);
      roots.push_back(std::conj(root));
      remaining -= 2;
    } else {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      roots.emplace_back(sign * modulus, 0.0);
      remaining -= 1;
    }
  }
  return roots;
}

}  // namespace

ArmaParams random_stable_arma(int p, int q, double sigma2,
                              std::uint64_t seed) {
  if (p < 0 || q < 0)
    throw std::invalid_argument("random_stable_arma: negative order");
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("random_stable_arma: sigma2 must be > 0");
  Rng rng(seed);
  ArmaParams params;
  params.phi = coefficients_from_roots(sample_roots(rng, p));
  params.lambda = coefficients_from_roots(sample_roots(rng, q));
  params.sigma2 = sigma2;
  return params;
}

Eigen::VectorXd reflect_to_stable(const Eigen::VectorXd& coeffs,
                                  double margin) {
  const Eigen::VectorXd trimmed = trim_trailing_zeros(coeffs);
  if (trimmed.size() == 0) return coeffs;
  if (stability_margin(trimmed).min_root_modulus >= 1.0 + margin) return coeffs;

  const Eigen::VectorXcd roots = polynomial_roots(trimmed);
  std::vector<std::complex<double>> adjusted(roots.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    std::complex<double> z = roots[i];
    double m = std::abs(z);
    if (m < 1.0) {
      z = z / (m * m);  // 1 / conj(z), same argument
      m = std::abs(z);
    }
    if (m < 1.0 + margin) z *= (1.0 + margin) / m;
    adjusted[static_cast<std::size_t>(i)] = z;
  }
  Eigen::VectorXd result = coefficients_from_roots(adjusted);
  // preserve the caller's length (trailing zeros for trimmed degrees)
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(coeffs.size());
  padded.head(result.size()) = result;
  return padded;
}

}  // namespace eqmest
