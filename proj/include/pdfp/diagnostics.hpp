#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>

#include "pdfp/solvers.hpp"

namespace pdfp {

/// sqrt(||x||^2 + lambda ||v||^2).
double lambda_norm(const PDState &u, double lambda);

/// sqrt(<v, (I - lambda D D^T) v>). Tiny negative values from rounding are
/// clamped to zero; anything below -1e-12 max(1, ||v||^2) means lambda is too
/// large and throws InvariantViolation.
double m_seminorm(const Vec &v, const LinearOp &D, double lambda);

/// 20 log10(||x_true|| / ||x - x_true||) in dB; +inf when x == x_true.
double snr(const Vec &x, const Vec &x_true);

/// ||x - x_true||^2 / ||x_true||^2 (squared, unlike snr).
double rel_err(const Vec &x, const Vec &x_true);

/// ||u - T(u)||_lambda.
double fixed_point_residual(const Problem &p, double gamma, double lambda, const PDState &u);

struct RateCertificate {
  double mu;
  double nu;
  double eta;
  double theta;
  double d; ///< ||u_1 - u_0||_lambda; NaN until supplied

  /// d theta^n / (1 - theta).
  double bound(std::size_t n) const;
};

/// Linear-rate certificate for the relaxed iteration with alpha_n in
/// [alpha_lo, alpha_hi] and f2 sigma-strongly convex:
///   mu^2 = 1 - lambda lambda_min(D D^T),  nu^2 = 1 - gamma sigma (2 beta - gamma) / beta,
///   eta = max(mu, nu),  theta = alpha_hi + (1 - alpha_hi) eta.
/// theta is the Lipschitz constant of alpha I + (1 - alpha) T maximized over the
/// alpha interval. Returns nullopt when mu >= 1 or nu >= 1, when D D^T is
/// singular, or when the dual dimension exceeds 5000.
std::optional<RateCertificate> rate_certificate(const Problem &p, double gamma, double lambda, double alpha_lo,
                                                double alpha_hi, double sigma,
                                                std::optional<double> d = std::nullopt);

/// True iff ||u_{n+1} - u_ref||_lambda <= ||u_n - u_ref||_lambda + 1e-10 along the
/// stored iterates. Throws InvalidArgument when the trace has records but no iterates.
bool fejer_check(const RunTrace &trace, const PDState &u_ref, double lambda, double slack = 1e-10);

/// Header `iter,gamma,lambda,alpha,objective,residual,snr,relerr,wall_ms`.
void write_trace_csv(const RunTrace &trace, std::ostream &out);
void write_trace_csv(const RunTrace &trace, const std::filesystem::path &path);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double value);

} // namespace pdfp
