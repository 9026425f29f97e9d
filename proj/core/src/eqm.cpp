#include "eqmest/eqm.hpp"

#include <chrono>
#include <cmath>

#include "eqmest/mle.hpp"

namespace eqmest {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Everything one EqM iteration needs from the conditional law: the mean,
// the first column and corner of the conditional covariance, its
// log-determinant, and the observed-data log-likelihood at the same
// parameters.
struct ConditionalSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd cov_first_col;
  double cov_corner = 0.0;
  double log_det_cov = 0.0;
  double observed_loglik = 0.0;
};

ConditionalSummary analyze_dense(const ArmaParams& params,
                                 const ObservationRecord& rec) {
  const Eigen::Index n = rec.size();
  const auto& obs = rec.observed_idx();
  const auto& miss = rec.missing_idx();
  const auto n_obs = static_cast<Eigen::Index>(obs.size());
  const auto n_miss = static_cast<Eigen::Index>(miss.size());

  const Eigen::MatrixXd sigma = joint_covariance(params, n);
  const Eigen::MatrixXd sigma_oo = detail::select_submatrix(sigma, obs, obs);
  const auto llt_oo = detail::cholesky_or_throw(sigma_oo, "eqm conditioning");

  ConditionalSummary summary;
  Eigen::VectorXd z = rec.observed_values();
  const Eigen::VectorXd solved = llt_oo.solve(z);
  llt_oo.matrixL().solveInPlace(z);
  summary.observed_loglik =
      -0.5 * (static_cast<double>(n_obs) * kLogTwoPi +
              detail::log_det_from_llt(llt_oo) + z.squaredNorm());

  if (n_miss == 0) return summary;

  const Eigen::MatrixXd sigma_mo = detail::select_submatrix(sigma, miss, obs);
  summary.mean = sigma_mo * solved;

  Eigen::MatrixXd w = sigma_mo.transpose();
  llt_oo.matrixL().solveInPlace(w);
  Eigen::MatrixXd cov = detail::select_submatrix(sigma, miss, miss);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  cov.triangularView<Eigen::StrictlyUpper>() =
      cov.transpose().triangularView<Eigen::StrictlyUpper>();

  const auto llt_cov = detail::cholesky_or_throw(cov, "eqm conditional");
  summary.log_det_cov = detail::log_det_from_llt(llt_cov);
  summary.cov_first_col = cov.col(0);
  summary.cov_corner = cov(0, 0);
  return summary;
}

// Information-form conditioning for q = 0: the precision of the transient
// AR law is the banded matrix F^T F / sigma2, so conditioning on the
// observed block reduces to a Cholesky factorisation of the missing-block
// precision. The observed log-likelihood follows from the chain rule
//   l(y_o) = log p(merged at mean) - log p(mean | y_o).
ConditionalSummary analyze_information(const ArmaParams& params,
                                       const ObservationRecord& rec) {
  const Eigen::Index n = rec.size();
  const int p = params.p();
  const auto& miss = rec.missing_idx();
  const auto n_miss = static_cast<Eigen::Index>(miss.size());
  if (!(params.sigma2 > 0.0))
    throw NumericalError("eqm conditioning: sigma2 must be positive");

  // unscaled band of F^T F: entries vanish beyond |i - j| > p
  Eigen::VectorXd f = Eigen::VectorXd::Zero(p + 1);
  f[0] = 1.0;
  f.tail(p) = params.phi;
  const auto band_entry = [&](Eigen::Index i, Eigen::Index j) {
    if (j < i) std::swap(i, j);
    const Eigen::Index d = j - i;
    if (d > p) return 0.0;
    double sum = 0.0;
    const Eigen::Index t_max = std::min(n - 1, i + p);
    for (Eigen::Index t = j; t <= t_max; ++t) sum += f[t - i] * f[t - j];
    return sum;
  };

  ConditionalSummary summary;
  double log_det_cond = 0.0;

  if (n_miss > 0) {
    Eigen::MatrixXd prec_mm(n_miss, n_miss);
    for (Eigen::Index a = 0; a < n_miss; ++a)
      for (Eigen::Index b = a; b < n_miss; ++b) {
        const double v = band_entry(miss[static_cast<std::size_t>(a)],
                                    miss[static_cast<std::size_t>(b)]);
        prec_mm(a, b) = v;
        prec_mm(b, a) = v;
      }

    // rhs = -Lambda_mo y_o, using only observed neighbours within the band
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_miss);
    for (Eigen::Index a = 0; a < n_miss; ++a) {
      const Eigen::Index i = miss[static_cast<std::size_t>(a)];
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - p);
      const Eigen::Index hi = std::min(n - 1, i + p);
      double sum = 0.0;
      for (Eigen::Index j = lo; j <= hi; ++j)
        if (rec.is_observed(j)) sum += band_entry(i, j) * rec.value_at(j);
      rhs[a] = -sum;
    }

    const auto llt = detail::cholesky_or_throw(prec_mm, "eqm conditioning");
    summary.mean = llt.solve(rhs);
    const Eigen::VectorXd first_col =
        llt.solve(Eigen::VectorXd::Unit(n_miss, 0));
    summary.cov_first_col = params.sigma2 * first_col;
    summary.cov_corner = summary.cov_first_col[0];
    log_det_cond = static_cast<double>(n_miss) * std::log(params.sigma2) -
                   detail::log_det_from_llt(llt);
    summary.log_det_cov = log_det_cond;
  }

  const Eigen::VectorXd merged =
      n_miss > 0 ? rec.merged_with(summary.mean) : rec.observed_values();
  const double full_loglik = complete_data_loglik(params, merged);
  summary.observed_loglik =
      full_loglik +
      0.5 * (static_cast<double>(n_miss) * kLogTwoPi + log_det_cond);
  return summary;
}

ConditionalSummary analyze(const ArmaParams& params,
                           const ObservationRecord& rec,
                           EqmConfig::Conditioning mode) {
  const bool use_information =
      mode == EqmConfig::Conditioning::information ||
      (mode == EqmConfig::Conditioning::automatic && params.q() == 0);
  if (use_information && params.q() != 0)
    throw std::invalid_argument(
        "eqm_run: information conditioning requires q = 0");
  return use_information ? analyze_information(params, rec)
                         : analyze_dense(params, rec);
}

Eigen::VectorXd equalise(const ConditionalSummary& summary, double theta0,
                         bool& clamped) {
  if (summary.mean.size() == 0) {
    clamped = false;
    return Eigen::VectorXd();
  }
  if (!(summary.cov_corner > 0.0))
    throw NumericalError("equalisation: degenerate conditional covariance");
  const double radicand =
      (std::log(theta0) - summary.log_det_cov) / summary.cov_corner;
  clamped = radicand < 0.0;
  if (clamped) return summary.mean;
  return summary.mean + summary.cov_first_col * std::sqrt(radicand);
}

}  // namespace

EqualisationResult equalisation_estimate(const GaussianConditional& cond,
                                         double theta0) {
  if (!(theta0 > 0.0))
    throw std::invalid_argument("equalisation_estimate: theta0 must be > 0");
  ConditionalSummary summary;
  summary.mean = cond.mean;
  if (cond.mean.size() > 0) {
    summary.cov_first_col = cond.cov.col(0);
    summary.cov_corner = cond.cov(0, 0);
    summary.log_det_cov = cond.log_det_cov;
  }
  EqualisationResult result;
  result.y_m = equalise(summary, theta0, result.clamped);
  return result;
}

EqmResult eqm_run(const ObservationRecord& rec, int p, int q,
                  const ArmaParams& init, const EqmConfig& cfg) {
  validate(init);
  if (init.p() != p || init.q() != q)
    throw std::invalid_argument("eqm_run: init orders mismatch");
  if (!(cfg.theta0 > 0.0))
    throw std::invalid_argument("eqm_run: theta0 must be > 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("eqm_run: max_iters must be >= 1");
  if (rec.observed_idx().empty())
    throw std::invalid_argument("eqm_run: nothing observed");

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };

  EqmResult result;
  result.params = init;
  auto& trace = result.trace;

  const auto record = [&](const ArmaParams& params, double loglik) {
    trace.iterations.push_back({params.flatten(), loglik, elapsed()});
  };

  try {
    if (rec.missing_idx().empty()) {
      const Eigen::VectorXd y = rec.observed_values();
      record(init, complete_data_loglik(init, y));
      const MleResult fit = complete_data_mle(y, p, q, init);
      result.params = fit.params;
      record(fit.params, complete_data_loglik(fit.params, y));
      trace.termination = Termination::param_converged;
      return result;
    }

    ConditionalSummary summary = analyze(init, rec, cfg.conditioning);
    record(init, summary.observed_loglik);

    for (int k = 0; k < cfg.max_iters; ++k) {
      bool clamped = false;
      const Eigen::VectorXd y_m = equalise(summary, cfg.theta0, clamped);
      if (clamped) ++trace.clamp_count;

      const Eigen::VectorXd merged = rec.merged_with(y_m);
      const MleResult fit = complete_data_mle(merged, p, q, result.params);
      const ArmaParams previous = result.params;
      result.params = fit.params;

      summary = analyze(result.params, rec, cfg.conditioning);
      record(result.params, summary.observed_loglik);

      const auto& iters = trace.iterations;
      if (cfg.stop == StopRule::parameter_change) {
        const double change =
            (result.params.flatten() - previous.flatten()).norm();
        if (change <= cfg.tol) {
          trace.termination = Termination::param_converged;
          return result;
        }
      } else if (cfg.stop == StopRule::loglik_change) {
        const double change = std::abs(iters[iters.size() - 1].loglik -
                                       iters[iters.size() - 2].loglik);
        if (change <= cfg.tol) {
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

}  // namespace eqmest
