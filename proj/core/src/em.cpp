#include "eqmest/em.hpp"

#include <chrono>
#include <cmath>

#include "eqmest/gaussian.hpp"

namespace eqmest {

Eigen::VectorXd SsmParams::flatten() const {
  const Eigen::Index r2 = A.size();
  Eigen::VectorXd v(2 * r2 + 1);
  v.head(r2) = Eigen::Map<const Eigen::VectorXd>(A.data(), r2);
  v.segment(r2, r2) = Eigen::Map<const Eigen::VectorXd>(Q.data(), r2);
  v[2 * r2] = R;
  return v;
}

StateSpaceModel SsmParams::to_state_space() const {
  StateSpaceModel model;
  model.A = A;
  model.Q = Q;
  model.R = R;
  return model;
}

EmStepResult em_step(const SsmParams& params, const ObservationRecord& rec) {
  const Eigen::Index r = params.r();
  if (params.A.cols() != r || params.Q.rows() != r || params.Q.cols() != r)
    throw std::invalid_argument("em_step: inconsistent parameter dimensions");
  const Eigen::Index n = rec.size();

  const SmootherOutput smooth = kalman_smooth(params.to_state_space(), rec);
  if (!std::isfinite(smooth.loglik))
    throw NumericalError("em_step: non-finite log-likelihood");

  // smoothed cross moments; the fixed x_0 = 0 contributes nothing
  Eigen::MatrixXd s00 = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd s10 = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd s11 = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const Eigen::MatrixXd second =
        smooth.smoothed_covs[i] +
        smooth.smoothed_means[i] * smooth.smoothed_means[i].transpose();
    s11 += second;
    if (t < n - 1) s00 += second;
    if (t >= 1)
      s10 += smooth.lag_one_covs[i] +
             smooth.smoothed_means[i] * smooth.smoothed_means[i - 1].transpose();
  }

  EmStepResult result;
  result.loglik_before = smooth.loglik;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s00);
  const Eigen::VectorXd d = ldlt.vectorD();
  const bool singular = ldlt.info() != Eigen::Success ||
                        d.minCoeff() <= 1e-12 * std::abs(d.maxCoeff());
  if (singular) {
    Eigen::MatrixXd ridged = s00;
    ridged.diagonal().array() += 1e-8 * s00.trace() / static_cast<double>(r);
    ldlt.compute(ridged);
    result.ridged = true;
  }
  const Eigen::MatrixXd a_new = ldlt.solve(s10.transpose()).transpose();

  Eigen::MatrixXd q_new = (s11 - a_new * s10.transpose()) / static_cast<double>(n);
  q_new = 0.5 * (q_new + q_new.transpose()).eval();
  // the exact M-step output is PSD; rounding can leave eigenvalues a few
  // ulp below zero, which the smoother identities cannot tolerate
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q_eig(q_new);
  if (q_eig.eigenvalues().minCoeff() < 0.0) {
    q_new = q_eig.eigenvectors() *
            q_eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
            q_eig.eigenvectors().transpose();
    q_new = 0.5 * (q_new + q_new.transpose()).eval();
  }

  double r_new = 0.0;
  for (Eigen::Index t : rec.observed_idx()) {
    const auto i = static_cast<std::size_t>(t);
    const double residual = rec.value_at(t) - smooth.smoothed_means[i][0];
    r_new += residual * residual + smooth.smoothed_covs[i](0, 0);
  }
  r_new /= static_cast<double>(rec.observed_idx().size());

  result.params = SsmParams{a_new, q_new, r_new};
  return result;
}

EmResult em_run(const ObservationRecord& rec, const SsmParams& init,
                const EmConfig& cfg) {
  if (cfg.max_iters < 1)
    throw std::invalid_argument("em_run: max_iters must be >= 1");
  if (rec.observed_idx().empty())
    throw std::invalid_argument("em_run: nothing observed");

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };

  EmResult result;
  result.params = init;
  auto& trace = result.trace;

  const auto record = [&](const SsmParams& params, double loglik) {
    trace.iterations.push_back({params.flatten(), loglik, elapsed()});
  };

  try {
    EmStepResult step = em_step(init, rec);
    record(init, step.loglik_before);

    for (int k = 0; k < cfg.max_iters; ++k) {
      const SsmParams previous = result.params;
      result.params = step.params;

      step = em_step(result.params, rec);
      record(result.params, step.loglik_before);

      if (cfg.stop == StopRule::parameter_change) {
        if ((result.params.flatten() - previous.flatten()).norm() <= cfg.tol) {
          trace.termination = Termination::param_converged;
          return result;
        }
      } else if (cfg.stop == StopRule::loglik_change) {
        const auto& iters = trace.iterations;
        if (std::abs(iters[iters.size() - 1].loglik -
                     iters[iters.size() - 2].loglik) <= cfg.tol) {
          trace.termination = Termination::loglik_converged;
          return result;
        }
      }
    }
    trace.termination = Termination::max_iters;
  } catch (const std::exception& e) {
    trace.termination = Termination::failed;
    trace.error = e.what();
  }
  return result;
}

MleResult naive_estimate(const ObservationRecord& rec, int p, int q) {
  const Eigen::VectorXd filled = rec.zero_filled();
  if (q == 0) return complete_data_mle(filled, p, 0, ArmaParams{});

  // AR-only pre-fit seeds the moving-average search
  ArmaParams init;
  if (filled.isZero(0.0)) {
    init.phi = Eigen::VectorXd::Zero(p);
  } else {
    init.phi = complete_data_mle(filled, p, 0, ArmaParams{}).params.phi;
  }
  init.lambda = Eigen::VectorXd::Zero(q);
  init.sigma2 = 1.0;
  return complete_data_mle(filled, p, q, init);
}

SsmParams initial_ssm_from(const ArmaParams& params,
                           const ObservationRecord& rec) {
  const StateSpaceModel model = build_state_space(params, 0.0);
  const Eigen::VectorXd y_obs = rec.observed_values();
  const double mean = y_obs.mean();
  const double var =
      (y_obs.array() - mean).square().sum() / static_cast<double>(y_obs.size());

  // the M-step cannot grow rank(Q) -- smoothed process-noise moments stay
  // on its range -- so a rank-one start would freeze the noise direction
  // forever; widen it to keep the model genuinely fully parametrised
  const Eigen::Index r = model.r();
  Eigen::MatrixXd q = model.Q;
  const double scale = std::max(q.trace() / static_cast<double>(r), 1e-12);
  q += 0.1 * scale * Eigen::MatrixXd::Identity(r, r);
  return SsmParams{model.A, q, std::max(1e-4 * var, 1e-12)};
}

}  // namespace eqmest
