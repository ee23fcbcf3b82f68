#include "pdfp/problem.hpp"

#include <sstream>

namespace pdfp {

double Problem::objective(const Vec &x) const { return f1.value(D.forward(x)) + f2.value(x); }

Problem make_problem(ProxFn f1, SmoothFn f2, LinearOp D, const PowerIterationOptions &opts)
{
  if (f1.dim() != D.out_dim() || f2.dim() != D.in_dim()) {
    std::ostringstream msg;
    msg << "make_problem: f1 on R^" << f1.dim() << ", f2 on R^" << f2.dim() << " incompatible with D: R^"
        << D.in_dim() << " -> R^" << D.out_dim();
    throw InvalidArgument(msg.str());
  }
  if (!(f2.lipschitz() > 0.0)) { throw InvalidArgument("make_problem: f2 must have a positive Lipschitz constant"); }
  double lmax = op_norm_sq(D, opts);
  if (D.kind() == LinearOp::Kind::generic) { lmax *= 1.0 + opts.tol; }
  const double beta = 1.0 / f2.lipschitz();
  return Problem{std::move(f1), std::move(f2), std::move(D), beta, lmax};
}

PDState zero_state(const Problem &p) { return PDState{Vec::Zero(p.dual_dim()), Vec::Zero(p.primal_dim())}; }

} // namespace pdfp
