#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "eqmest/arma.hpp"

namespace eqmest {

// A series of length N with an explicit observed/missing partition.
// Missing entries are absent optionals, never numeric sentinels, so they
// cannot leak into arithmetic. Indices are 0-based and kept sorted; the
// two index sets always partition {0, ..., N-1}.
class ObservationRecord {
 public:
  explicit ObservationRecord(std::vector<std::optional<double>> values);

  static ObservationRecord fully_observed(const Eigen::VectorXd& series);
  static ObservationRecord with_missing(
      const Eigen::VectorXd& series,
      const std::vector<Eigen::Index>& missing_idx);

  Eigen::Index size() const { return static_cast<Eigen::Index>(values_.size()); }
  const std::vector<std::optional<double>>& values() const { return values_; }
  const std::vector<Eigen::Index>& observed_idx() const { return observed_; }
  const std::vector<Eigen::Index>& missing_idx() const { return missing_; }

  bool is_observed(Eigen::Index t) const { return values_[static_cast<std::size_t>(t)].has_value(); }
  double value_at(Eigen::Index t) const;

  Eigen::VectorXd observed_values() const;

  // Full-length vector with `missing_values` substituted at the missing
  // indices (in index order).
  Eigen::VectorXd merged_with(const Eigen::VectorXd& missing_values) const;

  // Full-length vector with zeros at the missing indices.
  Eigen::VectorXd zero_filled() const;

 private:
  std::vector<std::optional<double>> values_;
  std::vector<Eigen::Index> observed_;
  std::vector<Eigen::Index> missing_;
};

struct ExperimentProblem {
  ObservationRecord estimation;
  Eigen::VectorXd validation;
  std::optional<ArmaParams> true_params;
  int p = 0;
  int q = 0;
  std::uint64_t seed = 0;
};

// Splits a fully observed series 2:1 in time (estimation span of
// ceil(2N/3) points first, validation afterwards), then masks
// floor(missing_fraction * estimation length) estimation points drawn
// uniformly without replacement. The validation span is never masked.
ExperimentProblem make_problem(const Eigen::VectorXd& series,
                               double missing_fraction, std::uint64_t seed);

}  // namespace eqmest
