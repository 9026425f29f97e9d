#include "eqmest/state_space.hpp"

#include <cmath>

#include "eqmest/gaussian.hpp"

namespace eqmest {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void symmetrize(Eigen::MatrixXd& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

struct ForwardPass {
  double loglik = 0.0;
  std::vector<Eigen::VectorXd> pred_means, filt_means;
  std::vector<Eigen::MatrixXd> pred_covs, filt_covs;
  std::vector<Eigen::VectorXd> gains;       // zero at missing indices
  std::vector<double> innovation_vars;      // S_t, 0 at missing indices
  std::vector<std::optional<double>> innovations;
};

ForwardPass run_forward(const StateSpaceModel& model,
                        const ObservationRecord& rec,
                        const FilterOptions& opts) {
  const Eigen::Index r = model.r();
  const Eigen::Index n = rec.size();
  if (model.A.cols() != r || model.Q.rows() != r || model.Q.cols() != r)
    throw std::invalid_argument("kalman_filter: inconsistent model dimensions");
  if (model.R < 0.0)
    throw std::invalid_argument("kalman_filter: negative measurement noise");

  ForwardPass out;
  out.pred_means.reserve(static_cast<std::size_t>(n));
  out.pred_covs.reserve(static_cast<std::size_t>(n));
  out.filt_means.reserve(static_cast<std::size_t>(n));
  out.filt_covs.reserve(static_cast<std::size_t>(n));
  out.gains.reserve(static_cast<std::size_t>(n));
  out.innovation_vars.assign(static_cast<std::size_t>(n), 0.0);
  out.innovations.resize(static_cast<std::size_t>(n));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd p = opts.diffuse_init
                          ? Eigen::MatrixXd(opts.diffuse_scale *
                                            Eigen::MatrixXd::Identity(r, r))
                          : Eigen::MatrixXd::Zero(r, r);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(r, r);

  for (Eigen::Index t = 0; t < n; ++t) {
    x = model.A * x;
    p = model.A * p * model.A.transpose() + model.Q;
    symmetrize(p);
    out.pred_means.push_back(x);
    out.pred_covs.push_back(p);

    Eigen::VectorXd gain = Eigen::VectorXd::Zero(r);
    if (rec.is_observed(t)) {
      const double s = p(0, 0) + model.R;
      if (!(s > 0.0))
        throw NumericalError("kalman_filter: innovation variance <= 0");
      const double v = rec.value_at(t) - x[0];
      out.innovations[static_cast<std::size_t>(t)] = v;
      out.innovation_vars[static_cast<std::size_t>(t)] = s;
      out.loglik += -0.5 * (kLogTwoPi + std::log(s) + v * v / s);
      gain = p.col(0) / s;
      x += gain * v;
      // Joseph form keeps P positive semi-definite with R = 0
      const Eigen::MatrixXd ikc = identity - gain * Eigen::RowVectorXd::Unit(r, 0);
      p = ikc * p * ikc.transpose() + model.R * gain * gain.transpose();
      symmetrize(p);
    }
    out.gains.push_back(gain);
    out.filt_means.push_back(x);
    out.filt_covs.push_back(p);
  }
  return out;
}

}  // namespace

StateSpaceModel build_state_space(const ArmaParams& params,
                                  double measurement_noise) {
  validate(params);
  if (measurement_noise < 0.0)
    throw std::invalid_argument("build_state_space: negative measurement noise");
  const int p = params.p();
  const int q = params.q();
  const int r = std::max(p, q + 1);

  StateSpaceModel model;
  model.A = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i + 1 < r; ++i) model.A(i, i + 1) = 1.0;
  for (int j = 0; j < r; ++j) {
    const int lag = r - j;  // coefficient phi_lag sits in column j
    model.A(r - 1, j) = lag <= p ? -params.phi[lag - 1] : 0.0;
  }
  model.B = psi_weights(params, r);
  model.Q = params.sigma2 * model.B * model.B.transpose();
  model.R = measurement_noise;
  return model;
}

FilterResult kalman_filter(const StateSpaceModel& model,
                           const ObservationRecord& rec,
                           const FilterOptions& opts) {
  ForwardPass fwd = run_forward(model, rec, opts);
  FilterResult result;
  result.loglik = fwd.loglik;
  result.filtered_means = std::move(fwd.filt_means);
  result.filtered_covs = std::move(fwd.filt_covs);
  result.innovations = std::move(fwd.innovations);
  result.final_state = {result.filtered_means.back(),
                        result.filtered_covs.back()};
  return result;
}

// Backward pass in modified Bryson-Frazier form: adjoint quantities
// (lambda, Lambda) give
//   x_{t|N} = x_{t|t-1} + P_{t|t-1} lambda_t,
//   P_{t|N} = P_{t|t-1} - P_{t|t-1} Lambda_t P_{t|t-1},
//   Cov[x_t, x_{t-1} | y] = (I - P_{t|t-1} Lambda_t) A P_{t-1|t-1},
// with no inverse of a (possibly rank-deficient) predicted covariance.
SmootherOutput kalman_smooth(const StateSpaceModel& model,
                             const ObservationRecord& rec,
                             const FilterOptions& opts) {
  const ForwardPass fwd = run_forward(model, rec, opts);
  const Eigen::Index n = rec.size();
  const Eigen::Index r = model.r();

  SmootherOutput out;
  out.loglik = fwd.loglik;
  out.smoothed_means.resize(static_cast<std::size_t>(n));
  out.smoothed_covs.resize(static_cast<std::size_t>(n));
  out.lag_one_covs.resize(static_cast<std::size_t>(n));

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(r, r);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd capital_lambda = Eigen::MatrixXd::Zero(r, r);

  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const auto i = static_cast<std::size_t>(t);
    if (rec.is_observed(t)) {
      const double s = fwd.innovation_vars[i];
      const double v = *fwd.innovations[i];
      const Eigen::MatrixXd ikc =
          identity - fwd.gains[i] * Eigen::RowVectorXd::Unit(r, 0);
      const Eigen::VectorXd at_lambda =
          ikc.transpose() * (model.A.transpose() * lambda);
      lambda = at_lambda + Eigen::VectorXd::Unit(r, 0) * (v / s);
      Eigen::MatrixXd propagated =
          ikc.transpose() * model.A.transpose() * capital_lambda * model.A * ikc;
      propagated(0, 0) += 1.0 / s;
      capital_lambda = propagated;
    } else {
      lambda = model.A.transpose() * lambda;
      capital_lambda = model.A.transpose() * capital_lambda * model.A;
    }
    symmetrize(capital_lambda);

    const Eigen::MatrixXd& p_pred = fwd.pred_covs[i];
    if (t == n - 1) {
      // nothing lies beyond the last index: smoothed == filtered
      out.smoothed_means[i] = fwd.filt_means[i];
      out.smoothed_covs[i] = fwd.filt_covs[i];
    } else {
      out.smoothed_means[i] = fwd.pred_means[i] + p_pred * lambda;
      Eigen::MatrixXd cov = p_pred - p_pred * capital_lambda * p_pred;
      symmetrize(cov);
      out.smoothed_covs[i] = cov;
    }
    if (t >= 1) {
      out.lag_one_covs[i] =
          (identity - p_pred * capital_lambda) * model.A * fwd.filt_covs[i - 1];
    }
  }
  out.lag_one_covs[0] = Eigen::MatrixXd::Zero(r, r);
  return out;
}

Eigen::VectorXd one_step_predictions(const StateSpaceModel& model,
                                     const Eigen::VectorXd& series,
                                     const std::optional<FilterState>& initial) {
  const Eigen::Index r = model.r();
  const Eigen::Index n = series.size();
  Eigen::VectorXd x = initial ? initial->x : Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd p = initial ? initial->P : Eigen::MatrixXd::Zero(r, r);
  if (x.size() != r || p.rows() != r || p.cols() != r)
    throw std::invalid_argument("one_step_predictions: state size mismatch");
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(r, r);

  Eigen::VectorXd predictions(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    x = model.A * x;
    p = model.A * p * model.A.transpose() + model.Q;
    symmetrize(p);
    predictions[t] = x[0];

    const double s = p(0, 0) + model.R;
    if (!(s > 0.0))
      throw NumericalError("one_step_predictions: innovation variance <= 0");
    const Eigen::VectorXd gain = p.col(0) / s;
    x += gain * (series[t] - predictions[t]);
    const Eigen::MatrixXd ikc = identity - gain * Eigen::RowVectorXd::Unit(r, 0);
    p = ikc * p * ikc.transpose() + model.R * gain * gain.transpose();
    symmetrize(p);
  }
  return predictions;
}

}  // namespace eqmest
