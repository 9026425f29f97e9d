#include "eqmest/trace.hpp"

namespace eqmest {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::param_converged:
      return "param_converged";
    case Termination::loglik_converged:
      return "loglik_converged";
    case Termination::max_iters:
      return "max_iters";
    case Termination::failed:
      return "failed";
  }
  return "unknown";
}

const char* to_string(StopRule r) {
  switch (r) {
    case StopRule::parameter_change:
      return "param";
    case StopRule::loglik_change:
      return "loglik";
    case StopRule::fixed_iterations:
      return "fixed";
  }
  return "unknown";
}

}  // namespace eqmest
