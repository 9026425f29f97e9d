#include "eqmest/gaussian.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace eqmest {

namespace detail {

Eigen::MatrixXd select_submatrix(const Eigen::MatrixXd& m,
                                 const std::vector<Eigen::Index>& rows,
                                 const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], cols[j]);
  return out;
}

Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const Eigen::MatrixXd& m,
                                              const char* context) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    // rough conditioning report from the pivoted LDL^T diagonal
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    const double cond = dmin > 0.0 ? dmax / dmin
                                   : std::numeric_limits<double>::infinity();
    throw SingularCovarianceError(
        std::string(context) + ": matrix not positive definite"
        " (LDL^T diagonal ratio " + std::to_string(cond) + ")",
        cond);
  }
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail

Eigen::MatrixXd banded_toeplitz_operator(const Eigen::VectorXd& coeffs,
                                         Eigen::Index n) {
  if (n < 1)
    throw std::invalid_argument("banded_toeplitz_operator: n must be >= 1");
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= coeffs.size(); ++k)
    for (Eigen::Index i = k; i < n; ++i) t(i, i - k) = coeffs[k - 1];
  return t;
}

Eigen::MatrixXd joint_covariance(const ArmaParams& params, Eigen::Index n) {
  validate(params);
  if (n < 1) throw std::invalid_argument("joint_covariance: n must be >= 1");
  if (n > kMaxDenseDimension)
    throw std::length_error("joint_covariance: dimension exceeds dense budget");

  // G = F^{-1} L column by column; F is unit lower triangular, so the
  // solve is always well defined
  const Eigen::MatrixXd f = banded_toeplitz_operator(params.phi, n);
  Eigen::MatrixXd g = banded_toeplitz_operator(params.lambda, n);
  f.triangularView<Eigen::Lower>().solveInPlace(g);

  Eigen::MatrixXd sigma(n, n);
  sigma.setZero();
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(g, params.sigma2);
  sigma.triangularView<Eigen::StrictlyUpper>() =
      sigma.transpose().triangularView<Eigen::StrictlyUpper>();
  return sigma;
}

GaussianConditional condition_gaussian(
    const Eigen::MatrixXd& sigma, const std::vector<Eigen::Index>& observed_idx,
    const std::vector<Eigen::Index>& missing_idx, const Eigen::VectorXd& y_obs) {
  const auto n_obs = static_cast<Eigen::Index>(observed_idx.size());
  const auto n_miss = static_cast<Eigen::Index>(missing_idx.size());
  if (y_obs.size() != n_obs)
    throw std::invalid_argument("condition_gaussian: y_obs size mismatch");
  if (n_obs < 1)
    throw std::invalid_argument("condition_gaussian: nothing observed");
  if (static_cast<Eigen::Index>(observed_idx.size() + missing_idx.size()) !=
      sigma.rows())
    throw std::invalid_argument("condition_gaussian: partition does not cover sigma");

  GaussianConditional cond;
  if (n_miss == 0) return cond;

  const Eigen::MatrixXd sigma_oo =
      detail::select_submatrix(sigma, observed_idx, observed_idx);
  const Eigen::MatrixXd sigma_mo =
      detail::select_submatrix(sigma, missing_idx, observed_idx);
  const Eigen::MatrixXd sigma_mm =
      detail::select_submatrix(sigma, missing_idx, missing_idx);

  const auto llt_oo = detail::cholesky_or_throw(sigma_oo, "condition_gaussian");
  cond.mean = sigma_mo * llt_oo.solve(y_obs);

  // cov = Sigma_mm - W^T W with W = L_oo^{-1} Sigma_om
  Eigen::MatrixXd w = sigma_mo.transpose();
  llt_oo.matrixL().solveInPlace(w);
  Eigen::MatrixXd cov = sigma_mm;
  cov.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  cov.triangularView<Eigen::StrictlyUpper>() =
      cov.transpose().triangularView<Eigen::StrictlyUpper>();
  cond.cov = cov;

  const auto llt_cov =
      detail::cholesky_or_throw(cond.cov, "condition_gaussian (conditional)");
  cond.log_det_cov = detail::log_det_from_llt(llt_cov);
  return cond;
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
  const Eigen::Index d = x.size();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d)
    throw std::invalid_argument("mvn_logpdf: dimension mismatch");
  if (d == 0) return 0.0;
  const auto llt = detail::cholesky_or_throw(cov, "mvn_logpdf");
  Eigen::VectorXd z = x - mean;
  llt.matrixL().solveInPlace(z);
  constexpr double log_two_pi = 1.8378770664093454836;  // log(2 pi)
  return -0.5 * (static_cast<double>(d) * log_two_pi +
                 detail::log_det_from_llt(llt) + z.squaredNorm());
}

double observed_loglik_dense(const ArmaParams& params,
                             const ObservationRecord& rec) {
  if (rec.observed_idx().empty())
    throw std::invalid_argument("observed_loglik_dense: nothing observed");
  const Eigen::MatrixXd sigma = joint_covariance(params, rec.size());
  const Eigen::MatrixXd sigma_oo =
      detail::select_submatrix(sigma, rec.observed_idx(), rec.observed_idx());
  return mvn_logpdf(rec.observed_values(),
                    Eigen::VectorXd::Zero(sigma_oo.rows()), sigma_oo);
}

}  // namespace eqmest
