#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "pdfp/problem.hpp"

namespace pdfp {

struct StepParams {
  double gamma;  ///< primal stepsize, in (0, 2 beta)
  double lambda; ///< dual stepsize, in (0, 1/lambda_max(D D^T)]
  double alpha;  ///< Mann relaxation weight, in [0, 1)
};

/// Iteration-indexed source of (gamma_n, lambda_n, alpha_n). A schedule may
/// look at the current primal iterate x_n (the dynamic rule does) but keeps no
/// mutable state, so one schedule can drive several runs at once.
class Schedule {
public:
  using Source = std::function<StepParams(std::size_t n, const Vec &x)>;

  Schedule(std::string name, Source source) : name_(std::move(name)), source_(std::move(source)) {}

  StepParams at(std::size_t n, const Vec &x) const { return source_(n, x); }
  const std::string &name() const { return name_; }

private:
  std::string name_;
  Source source_;
};

struct ScheduleClamp {
  double gamma_lo;
  double gamma_hi;
  double lambda_lo;
  double lambda_hi;
  double alpha_lo;
  double alpha_hi;

  /// gamma in [0.01 beta, 1.99 beta], lambda in (0, 1/lambda_max], alpha in [0.1, 0.9].
  static ScheduleClamp defaults(const Problem &p);
};

enum class ScheduleKind { constant, bb_dynamic, convergent_perturbation };

/// Numerator of the dynamic rule gamma_n = f(x_n) / ||grad f2(x_n)||^2:
/// `literal` uses ||A x - b||^2, `half` uses 0.5 ||A x - b||^2 (= f2 itself).
enum class BbNumerator { literal, half };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double gamma0 = 0.0;
  double lambda0 = 0.0;
  double alpha0 = 0.0;
  std::optional<ScheduleClamp> clamp;
  double decay = 0.0;
  BbNumerator numerator = BbNumerator::literal;
};

Schedule constant_schedule(const Problem &p, double gamma, double lambda, double alpha);

/// gamma_n = clamp(||A x_n - b||^2 / ||A^T (A x_n - b)||^2); lambda and alpha are
/// held at lambda0 (capped at clamp.lambda_hi) and alpha0. An exact fit emits
/// gamma_lo; a zero gradient with a nonzero residual emits gamma_hi.
Schedule bb_dynamic_schedule(const Problem &p, double lambda0, double alpha0, const ScheduleClamp &clamp,
                             BbNumerator numerator = BbNumerator::literal);

/// gamma_n = gamma + decay/(n+1), lambda_n = lambda (1 + decay/(gamma (n+1))), both
/// capped to their admissible ranges; converges to (gamma, lambda).
Schedule convergent_perturbation_schedule(const Problem &p, double gamma, double lambda, double alpha,
                                          double decay);

Schedule make_schedule(const ScheduleSpec &spec, const Problem &p);

/// Throws InvalidArgument naming iteration `n` when the triple is outside the
/// ranges the convergence theory needs (with 1e-12 beta slack on gamma).
void validate_step(const Problem &p, const StepParams &s, std::size_t n);

} // namespace pdfp
