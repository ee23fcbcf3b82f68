#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pdfp/problem.hpp"
#include "pdfp/schedules.hpp"

namespace pdfp {

/// Converged when ||u_{n+1} - u_n||_lambda / max(1, ||u_n||_lambda) <= tol, or
/// stopped unconverged after max_iter iterations.
struct StoppingRule {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
};

struct TraceRecord {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  std::size_t iter = 0;  ///< iterations completed (this row describes u_iter)
  double gamma = nan;
  double lambda = nan;
  double alpha = nan;
  double objective = nan; ///< f1(D x_{n+1}) + f2(x_{n+1})
  double residual = nan;  ///< ||u_n - T^n u_n||_lambda
  double step = nan;      ///< ||u_{n+1} - u_n||_lambda
  double ref_dist = nan;  ///< ||u_{n+1} - u_ref||_lambda, when a reference is supplied
  double snr = nan;       ///< dB, when the ground truth is supplied
  double relerr = nan;
  double wall_ms = nan;   ///< elapsed since the start of the run
  std::size_t inner_iters = 0;
  bool inner_converged = true; ///< false when the inner budget ran out
};

struct RunTrace {
  std::vector<TraceRecord> records;
  /// u_0, u_1, ... when RunOptions::store_iterates is set.
  std::vector<PDState> iterates;
};

struct RunOptions {
  bool record_objective = true;
  bool store_iterates = false;
  /// Checks (gamma, lambda, alpha) against the convergence ranges every
  /// iteration. Only test harnesses exploring divergent runs turn this off.
  bool validate = true;
  std::optional<PDState> reference;
  std::optional<Vec> x_true;
};

struct SolveResult {
  PDState state;
  RunTrace trace;
  bool converged = false;
  std::size_t iterations = 0;
};

/// T(v, x) = (T1, T2) with
///   T1 = (I - prox_{(gamma/lambda) f1})(D(x - gamma grad f2(x)) + (I - lambda D D^T) v)
///   T2 = x - gamma grad f2(x) - lambda D^T T1.
PDState apply_T(const Problem &p, double gamma, double lambda, const PDState &u);

/// T^n: apply_T with (gamma_n, lambda_n) drawn from the schedule at index n.
PDState apply_Tn(const Problem &p, const Schedule &sched, std::size_t n, const PDState &u);

/// u_{n+1} = T(u_n).
SolveResult pdfp2o(const Problem &p, double gamma, double lambda, const PDState &u0,
                   const StoppingRule &stop, const RunOptions &opts = {});

/// u_{n+1} = kappa u_n + (1 - kappa) T(u_n), kappa in [0, 1).
SolveResult pdfp2o_kappa(const Problem &p, double gamma, double lambda, double kappa, const PDState &u0,
                         const StoppingRule &stop, const RunOptions &opts = {});

/// u_{n+1} = T^n(u_n); alpha from the schedule is ignored.
SolveResult pdfp2o_ds(const Problem &p, const Schedule &sched, const PDState &u0, const StoppingRule &stop,
                      const RunOptions &opts = {});

/// Mann iteration u_{n+1} = alpha_n u_n + (1 - alpha_n) T^n(u_n).
SolveResult pdfp2o_dsn(const Problem &p, const Schedule &sched, const PDState &u0, const StoppingRule &stop,
                       const RunOptions &opts = {});

/// Forward step x_{n+1/2} = x_n - gamma grad f2(x_n), then kappa-averaged inner
/// iterations v <- kappa v + (1 - kappa) H(v),
///   H(v) = (I - prox_{(gamma/lambda) f1})(D x_{n+1/2} + (I - lambda D D^T) v),
/// warm-started from v_n and stopped by `inner_stop` (relative change of v);
/// then x_{n+1} = x_{n+1/2} - lambda D^T v*. TraceRecord::inner_iters counts
/// the inner iterations used.
SolveResult pfbs_fp2o(const Problem &p, double gamma, double lambda, double kappa, const StoppingRule &inner_stop,
                      const PDState &u0, const StoppingRule &stop, const RunOptions &opts = {});

struct IfpResult {
  Vec x;
  Vec v;
  RunTrace trace;
  bool converged = false;
  std::size_t iterations = 0;
};

/// min f1(D x) + 0.5 x^T Q x - b^T x with a small dense SPD Q:
/// v_{n+1} = kappa v_n + (1 - kappa) H(v_n),
///   H(v) = (I - prox_{f1/lambda})(D Q^{-1} b + (I - lambda D Q^{-1} D^T) v),
/// then x* = Q^{-1}(b - lambda D^T v*). Requires 0 < lambda <= 2/lambda_max(D Q^{-1} D^T).
IfpResult ifp2o(const Mat &Q, const Vec &b, const ProxFn &f1, const LinearOp &D, double lambda, double kappa,
                const StoppingRule &stop, const std::optional<Vec> &v0 = std::nullopt);

using StepSequence = std::function<double(std::size_t n)>;

/// Chambolle-Pock with extrapolation y_{n+1} = x_{n+1} + theta (x_{n+1} - x_n):
///   vbar_{n+1} = prox_{sigma_n f1*}(vbar_n + sigma_n D y_n)
///   x_{n+1}    = (I + tau_n grad f2)^{-1}(x_n - tau_n D^T vbar_{n+1})
/// The state's v holds vbar. f2 must be quadratic; the resolvent is closed
/// form for A = I and conjugate gradients (1e-10 relative residual) otherwise.
SolveResult chambolle_pock(const Problem &p, const StepSequence &sigma, const StepSequence &tau, double theta,
                           const PDState &u0, const StoppingRule &stop, const RunOptions &opts = {});

/// (x, d, v) state shared by SIU and the split form of PDFP2O_DS.
struct SplitState {
  Vec x;
  Vec d;
  Vec v;
};

struct SiuResult {
  SplitState state;
  RunTrace trace;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Explicit split inexact Uzawa for f2 = 0.5 ||A x - b||^2:
///   x_{n+1} = x_n - delta A^T(A x_n - b) - delta nu D^T(D x_n - d_n + v_n)
///   d_{n+1} = prox_{f1/nu}(D x_{n+1} + v_n)
///   v_{n+1} = v_n - (d_{n+1} - D x_{n+1})
SiuResult siu(const Problem &p, const StepSequence &delta, const StepSequence &nu, const SplitState &s0,
              const StoppingRule &stop, const RunOptions &opts = {});

SplitState split_zero_state(const Problem &p);

// Single-step reference forms used by the equivalence checks.

/// (vbar, x, y) state of the primal-dual rewrite of PDFP2O_DS.
struct CpFormState {
  Vec vbar;
  Vec x;
  Vec y;
};

/// One step of
///   vbar_{n+1} = prox_{sigma f1*}(vbar_n + sigma D y_n), sigma = lambda/gamma
///   x_{n+1}    = x_n - gamma grad f2(x_n) - gamma D^T vbar_{n+1}
///   y_{n+1}    = x_{n+1} - gamma grad f2(x_{n+1}) - gamma D^T vbar_{n+1}.
CpFormState cp_form_step(const Problem &p, double gamma, double lambda, const CpFormState &s);

/// Builds the (vbar, x, y) state matching a PDFP2O_DS state about to take a
/// step with (gamma, lambda): vbar = (lambda/gamma) v, y = x - gamma grad f2(x) - gamma D^T vbar.
CpFormState cp_form_from_state(const Problem &p, double gamma, double lambda, const PDState &u);

/// One SIU step (see siu()).
SplitState siu_step(const Problem &p, double delta, double nu, const SplitState &s);

/// One step of PDFP2O_DS in split form with gamma = delta, lambda = delta nu:
///   x_{n+1} = x_n - lambda D^T(D x_n - d_n + v_n) - gamma grad f2(x_n - lambda D^T(D x_n - d_n))
/// followed by the same d and v updates as SIU.
SplitState ds_split_form_step(const Problem &p, double delta, double nu, const SplitState &s);

} // namespace pdfp
