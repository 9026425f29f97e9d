#include "eqmest/mle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "eqmest/gaussian.hpp"

namespace eqmest {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kStabilityMargin = 1e-6;

ArmaParams projected(const Eigen::VectorXd& beta, int p, int q, double sigma2) {
  ArmaParams params;
  params.phi = reflect_to_stable(beta.head(p), kStabilityMargin);
  params.lambda = reflect_to_stable(beta.segment(p, q), kStabilityMargin);
  params.sigma2 = sigma2;
  return params;
}

// d e / d phi_j and d e / d lambda_j share the MA back-substitution:
// L (de/dphi_j) = shift_j(y) and L (de/dlambda_j) = -shift_j(e).
Eigen::MatrixXd residual_jacobian(const ArmaParams& params,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& e) {
  const int p = params.p();
  const int q = params.q();
  const Eigen::Index n = y.size();
  Eigen::MatrixXd jac(n, p + q);
  for (int j = 1; j <= p; ++j) {
    auto col = jac.col(j - 1);
    for (Eigen::Index t = 0; t < n; ++t) {
      double value = t - j >= 0 ? y[t - j] : 0.0;
      for (int k = 1; k <= q && t - k >= 0; ++k)
        value -= params.lambda[k - 1] * col[t - k];
      col[t] = value;
    }
  }
  for (int j = 1; j <= q; ++j) {
    auto col = jac.col(p + j - 1);
    for (Eigen::Index t = 0; t < n; ++t) {
      double value = t - j >= 0 ? -e[t - j] : 0.0;
      for (int k = 1; k <= q && t - k >= 0; ++k)
        value -= params.lambda[k - 1] * col[t - k];
      col[t] = value;
    }
  }
  return jac;
}

MleResult ar_least_squares(const Eigen::VectorXd& y, int p) {
  const Eigen::Index n = y.size();
  MleResult result;
  if (p == 0) {
    result.params.phi.resize(0);
    result.params.lambda.resize(0);
    result.params.sigma2 = y.squaredNorm() / static_cast<double>(n);
    result.degenerate = !(result.params.sigma2 > 0.0);
    return result;
  }

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
  for (int k = 1; k <= p; ++k)
    for (Eigen::Index t = k; t < n; ++t) x(t, k - 1) = y[t - k];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p)
    throw NumericalError("complete_data_mle: singular lag regression");
  Eigen::VectorXd phi = -qr.solve(y);

  if (!(stability_margin(phi).min_root_modulus > 1.0 + kStabilityMargin))
    phi = reflect_to_stable(phi, kStabilityMargin);

  result.params.phi = phi;
  result.params.lambda.resize(0);
  const double ssr = (y + x * phi).squaredNorm();
  result.params.sigma2 = ssr / static_cast<double>(n);
  result.degenerate = !(result.params.sigma2 > 0.0);
  return result;
}

MleResult arma_levenberg_marquardt(const Eigen::VectorXd& y, int p, int q,
                                   const ArmaParams& init) {
  const Eigen::Index n = y.size();
  const int dim = p + q;

  Eigen::VectorXd beta(dim);
  beta << reflect_to_stable(init.phi, kStabilityMargin),
      reflect_to_stable(init.lambda, kStabilityMargin);

  ArmaParams params = projected(beta, p, q, init.sigma2);
  Eigen::VectorXd e = arma_residuals(params, y);
  double ssr = e.squaredNorm();

  const double grad_tol = 1e-10 * std::max(1.0, ssr);
  constexpr int kMaxIterations = 200;
  double mu = -1.0;  // initialised from the first Hessian diagonal
  bool converged = false;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const Eigen::MatrixXd jac = residual_jacobian(params, y, e);
    const Eigen::VectorXd grad = jac.transpose() * e;
    const Eigen::MatrixXd hess = jac.transpose() * jac;
    if (grad.lpNorm<Eigen::Infinity>() <= grad_tol) {
      converged = true;
      break;
    }
    if (mu < 0.0) mu = 1e-3 * std::max(hess.diagonal().maxCoeff(), 1e-12);

    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd damped = hess;
      damped.diagonal().array() += mu;
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      Eigen::VectorXd candidate_beta = beta + step;
      ArmaParams candidate = projected(candidate_beta, p, q, params.sigma2);
      candidate_beta.head(p) = candidate.phi;
      candidate_beta.segment(p, q) = candidate.lambda;
      const Eigen::VectorXd candidate_e = arma_residuals(candidate, y);
      const double candidate_ssr = candidate_e.squaredNorm();
      if (candidate_ssr < ssr) {
        const double step_norm = (candidate_beta - beta).norm();
        beta = candidate_beta;
        params = candidate;
        e = candidate_e;
        const double improvement = ssr - candidate_ssr;
        ssr = candidate_ssr;
        mu = std::max(mu / 3.0, 1e-14);
        accepted = true;
        if (step_norm <= 1e-13 * (1.0 + beta.norm()) ||
            improvement <= 1e-16 * std::max(1.0, ssr))
          iter = kMaxIterations;  // no meaningful progress left
        break;
      }
      mu *= 4.0;
      if (mu > 1e14) break;
    }
    if (!accepted) break;
  }

  // final gradient check (the loop may exit on stalled steps)
  {
    const Eigen::MatrixXd jac = residual_jacobian(params, y, e);
    if ((jac.transpose() * e).lpNorm<Eigen::Infinity>() <= 1e3 * grad_tol)
      converged = true;
  }

  MleResult result;
  result.params = params;
  result.params.sigma2 = ssr / static_cast<double>(n);
  result.converged = converged;
  result.degenerate = !(result.params.sigma2 > 0.0);
  return result;
}

}  // namespace

Eigen::VectorXd arma_residuals(const ArmaParams& params,
                               const Eigen::VectorXd& y) {
  validate(params);
  const int p = params.p();
  const int q = params.q();
  const Eigen::Index n = y.size();
  Eigen::VectorXd e(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double value = y[t];
    for (int k = 1; k <= p && t - k >= 0; ++k)
      value += params.phi[k - 1] * y[t - k];
    for (int k = 1; k <= q && t - k >= 0; ++k)
      value -= params.lambda[k - 1] * e[t - k];
    e[t] = value;
  }
  return e;
}

double complete_data_loglik(const ArmaParams& params,
                            const Eigen::VectorXd& y) {
  validate(params);
  if (!(params.sigma2 > 0.0))
    return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd e = arma_residuals(params, y);
  const auto n = static_cast<double>(y.size());
  return -0.5 * n * (kLogTwoPi + std::log(params.sigma2)) -
         e.squaredNorm() / (2.0 * params.sigma2);
}

MleResult complete_data_mle(const Eigen::VectorXd& y, int p, int q,
                            const ArmaParams& init) {
  if (p < 0 || q < 0) throw std::invalid_argument("complete_data_mle: negative order");
  if (y.size() <= p + q + 1)
    throw std::invalid_argument("complete_data_mle: series too short");
  if (!y.allFinite())
    throw std::invalid_argument("complete_data_mle: non-finite data");

  if (y.isZero(0.0)) {
    // every parameter fits an identically zero series exactly
    MleResult result;
    result.params.phi = Eigen::VectorXd::Zero(p);
    result.params.lambda = Eigen::VectorXd::Zero(q);
    result.params.sigma2 = 0.0;
    result.degenerate = true;
    return result;
  }

  if (q == 0) return ar_least_squares(y, p);

  if (init.p() != p || init.q() != q)
    throw std::invalid_argument("complete_data_mle: init orders mismatch");
  return arma_levenberg_marquardt(y, p, q, init);
}

}  // namespace eqmest
