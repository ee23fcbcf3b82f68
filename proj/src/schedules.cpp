#include "pdfp/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdfp {

ScheduleClamp ScheduleClamp::defaults(const Problem &p)
{
  return ScheduleClamp{0.01 * p.beta, 1.99 * p.beta, 0.0, p.lambda_bound(), 0.1, 0.9};
}

void validate_step(const Problem &p, const StepParams &s, std::size_t n)
{
  const double eps = 1e-12 * p.beta;
  const double lambda_cap = p.lambda_bound() * (1.0 + 1e-12);
  auto fail = [n](const char *what, double value, const char *range) {
    std::ostringstream msg;
    msg << "iteration " << n << ": " << what << " = " << value << " outside " << range;
    throw InvalidArgument(msg.str());
  };
  if (!(s.gamma > eps && s.gamma < 2.0 * p.beta - eps)) { fail("gamma", s.gamma, "(0, 2 beta)"); }
  if (!(s.lambda > 0.0 && s.lambda <= lambda_cap)) { fail("lambda", s.lambda, "(0, 1/lambda_max(DD^T)]"); }
  if (!(s.alpha >= 0.0 && s.alpha < 1.0)) { fail("alpha", s.alpha, "[0, 1)"); }
}

Schedule constant_schedule(const Problem &p, double gamma, double lambda, double alpha)
{
  const StepParams s{gamma, lambda, alpha};
  validate_step(p, s, 0);
  return Schedule("constant", [s](std::size_t, const Vec &) { return s; });
}

Schedule bb_dynamic_schedule(const Problem &p, double lambda0, double alpha0, const ScheduleClamp &clamp,
                             BbNumerator numerator)
{
  const QuadraticData *quad = p.f2.quadratic();
  if (quad == nullptr) { throw UnsupportedProblem("bb_dynamic_schedule: f2 must be 0.5||Ax - b||^2"); }
  if (!(clamp.gamma_lo > 0.0 && clamp.gamma_lo <= clamp.gamma_hi && clamp.gamma_hi < 2.0 * p.beta)) {
    throw InvalidArgument("bb_dynamic_schedule: gamma clamp must sit inside (0, 2 beta)");
  }
  if (!(clamp.alpha_lo <= clamp.alpha_hi)) { throw InvalidArgument("bb_dynamic_schedule: empty alpha clamp"); }
  const double lambda = std::min(lambda0, clamp.lambda_hi);
  const double alpha = std::clamp(alpha0, clamp.alpha_lo, clamp.alpha_hi);
  validate_step(p, StepParams{clamp.gamma_lo, lambda, alpha}, 0);
  const double half = numerator == BbNumerator::half ? 0.5 : 1.0;
  const QuadraticData data = *quad;
  return Schedule("bb_dynamic", [data, clamp, lambda, alpha, half](std::size_t, const Vec &x) {
    const Vec r = data.A.forward(x) - data.b;
    const double num = half * r.squaredNorm();
    const double den = data.A.adjoint(r).squaredNorm();
    double gamma;
    if (num == 0.0) {
      gamma = clamp.gamma_lo;
    } else if (den == 0.0) {
      gamma = clamp.gamma_hi;
    } else {
      gamma = std::clamp(num / den, clamp.gamma_lo, clamp.gamma_hi);
    }
    return StepParams{gamma, lambda, alpha};
  });
}

Schedule convergent_perturbation_schedule(const Problem &p, double gamma, double lambda, double alpha,
                                          double decay)
{
  validate_step(p, StepParams{gamma, lambda, alpha}, 0);
  if (!(decay >= 0.0)) { throw InvalidArgument("convergent_perturbation_schedule: decay must be >= 0"); }
  const double gamma_cap = std::max(gamma, 1.99 * p.beta);
  const double lambda_cap = p.lambda_bound();
  return Schedule("convergent_perturbation",
                  [=](std::size_t n, const Vec &) {
                    const double bump = decay / static_cast<double>(n + 1);
                    return StepParams{std::min(gamma + bump, gamma_cap),
                                      std::min(lambda * (1.0 + bump / gamma), lambda_cap), alpha};
                  });
}

Schedule make_schedule(const ScheduleSpec &spec, const Problem &p)
{
  switch (spec.kind) {
  case ScheduleKind::constant: return constant_schedule(p, spec.gamma0, spec.lambda0, spec.alpha0);
  case ScheduleKind::bb_dynamic:
    return bb_dynamic_schedule(p, spec.lambda0, spec.alpha0, spec.clamp.value_or(ScheduleClamp::defaults(p)),
                               spec.numerator);
  case ScheduleKind::convergent_perturbation:
    return convergent_perturbation_schedule(p, spec.gamma0, spec.lambda0, spec.alpha0, spec.decay);
  }
  throw InvalidArgument("make_schedule: unknown schedule kind");
}

} // namespace pdfp
