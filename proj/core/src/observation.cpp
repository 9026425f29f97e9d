#include "eqmest/observation.hpp"

#include <algorithm>
#include <stdexcept>

#include "eqmest/rng.hpp"

namespace eqmest {

ObservationRecord::ObservationRecord(std::vector<std::optional<double>> values)
    : values_(std::move(values)) {
  if (values_.empty())
    throw std::invalid_argument("ObservationRecord: empty series");
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (values_[t].has_value()) {
      if (!std::isfinite(*values_[t]))
        throw std::invalid_argument("ObservationRecord: non-finite value");
      observed_.push_back(static_cast<Eigen::Index>(t));
    } else {
      missing_.push_back(static_cast<Eigen::Index>(t));
    }
  }
}

ObservationRecord ObservationRecord::fully_observed(
    const Eigen::VectorXd& series) {
  std::vector<std::optional<double>> values(static_cast<std::size_t>(series.size()));
  for (Eigen::Index t = 0; t < series.size(); ++t)
    values[static_cast<std::size_t>(t)] = series[t];
  return ObservationRecord(std::move(values));
}

ObservationRecord ObservationRecord::with_missing(
    const Eigen::VectorXd& series,
    const std::vector<Eigen::Index>& missing_idx) {
  std::vector<std::optional<double>> values(static_cast<std::size_t>(series.size()));
  for (Eigen::Index t = 0; t < series.size(); ++t)
    values[static_cast<std::size_t>(t)] = series[t];
  for (Eigen::Index t : missing_idx) {
    if (t < 0 || t >= series.size())
      throw std::invalid_argument("with_missing: index out of range");
    values[static_cast<std::size_t>(t)].reset();
  }
  return ObservationRecord(std::move(values));
}

double ObservationRecord::value_at(Eigen::Index t) const {
  const auto& v = values_[static_cast<std::size_t>(t)];
  if (!v.has_value())
    throw std::logic_error("ObservationRecord: value_at on missing index");
  return *v;
}

Eigen::VectorXd ObservationRecord::observed_values() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(observed_.size()));
  for (std::size_t i = 0; i < observed_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = *values_[static_cast<std::size_t>(observed_[i])];
  return out;
}

Eigen::VectorXd ObservationRecord::merged_with(
    const Eigen::VectorXd& missing_values) const {
  if (missing_values.size() != static_cast<Eigen::Index>(missing_.size()))
    throw std::invalid_argument("merged_with: size mismatch");
  Eigen::VectorXd out(size());
  for (Eigen::Index t : observed_) out[t] = *values_[static_cast<std::size_t>(t)];
  for (std::size_t i = 0; i < missing_.size(); ++i)
    out[missing_[i]] = missing_values[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::VectorXd ObservationRecord::zero_filled() const {
  return merged_with(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(missing_.size())));
}

ExperimentProblem make_problem(const Eigen::VectorXd& series,
                               double missing_fraction, std::uint64_t seed) {
  const Eigen::Index n = series.size();
  if (n < 3) throw std::invalid_argument("make_problem: series length must be >= 3");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    throw std::invalid_argument("make_problem: missing_fraction must lie in [0, 1)");

  const Eigen::Index est_len = (2 * n + 2) / 3;  // ceil(2N/3)
  const Eigen::VectorXd estimation_span = series.head(est_len);
  const Eigen::VectorXd validation = series.tail(n - est_len);

  // nudge before truncating so binary representations of fractions like
  // 0.3 do not land one below the intended count
  const auto n_missing = static_cast<Eigen::Index>(
      missing_fraction * static_cast<double>(est_len) + 1e-9);

  // partial Fisher-Yates draw of n_missing indices without replacement
  Rng rng(seed);
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(est_len));
  for (Eigen::Index i = 0; i < est_len; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 0; i < n_missing; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           rng.bounded(static_cast<std::uint64_t>(est_len - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Eigen::Index> missing(pool.begin(), pool.begin() + n_missing);
  std::sort(missing.begin(), missing.end());

  ExperimentProblem problem{
      ObservationRecord::with_missing(estimation_span, missing), validation,
      std::nullopt, 0, 0, seed};
  return problem;
}

}  // namespace eqmest
