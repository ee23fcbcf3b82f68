#pragma once

#include <limits>

#include "pdfp/linops.hpp"
#include "pdfp/prox.hpp"

namespace pdfp {

/// min_x f1(D x) + f2(x).
///
/// `lambda_max_ddt` is a slight over-estimate of lambda_max(D D^T) (the power
/// iteration result inflated by 1 + tol), so 1/lambda_max_ddt is always a safe
/// dual stepsize. It is 0 for the zero operator, where any lambda > 0 is valid.
struct Problem {
  ProxFn f1;
  SmoothFn f2;
  LinearOp D;
  double beta;
  double lambda_max_ddt;

  double objective(const Vec &x) const;
  /// Largest admissible dual stepsize 1/lambda_max(D D^T).
  double lambda_bound() const
  {
    return lambda_max_ddt > 0.0 ? 1.0 / lambda_max_ddt : std::numeric_limits<double>::infinity();
  }
  Index primal_dim() const { return D.in_dim(); }
  Index dual_dim() const { return D.out_dim(); }
};

/// Assembles a Problem, computing beta = 1/L(f2) and the cached spectral bound of D.
Problem make_problem(ProxFn f1, SmoothFn f2, LinearOp D, const PowerIterationOptions &opts = {});

PDState zero_state(const Problem &p);

} // namespace pdfp
