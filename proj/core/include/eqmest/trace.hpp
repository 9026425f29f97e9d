#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace eqmest {

enum class StopRule { parameter_change, loglik_change, fixed_iterations };

enum class Termination { param_converged, loglik_converged, max_iters, failed };

const char* to_string(Termination t);
const char* to_string(StopRule r);

struct IterationRecord {
  Eigen::VectorXd params;    // flattened parameter vector at this iterate
  double loglik = 0.0;       // observed-data log-likelihood at this iterate
  double wall_time_s = 0.0;  // elapsed seconds since the run started
};

struct EstimationTrace {
  std::vector<IterationRecord> iterations;  // first entry is the initialiser
  Termination termination = Termination::max_iters;
  int clamp_count = 0;  // equalisation clamps (EqM runs only)
  std::string error;    // non-empty when termination == failed

  int iteration_count() const {
    return static_cast<int>(iterations.size()) - 1;
  }
};

}  // namespace eqmest
