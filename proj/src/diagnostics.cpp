#include "pdfp/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace pdfp {

double lambda_norm(const PDState &u, double lambda)
{
  return std::sqrt(u.x.squaredNorm() + lambda * u.v.squaredNorm());
}

double m_seminorm(const Vec &v, const LinearOp &D, double lambda)
{
  if (v.size() != D.out_dim()) { throw InvalidArgument("m_seminorm: v does not live in the range of D"); }
  const double vv = v.squaredNorm();
  const double inner = vv - lambda * D.adjoint(v).squaredNorm();
  if (inner < -1e-12 * std::max(1.0, vv)) {
    throw InvariantViolation("m_seminorm: I - lambda D D^T is not positive semi-definite (lambda too large)");
  }
  return std::sqrt(std::max(inner, 0.0));
}

double snr(const Vec &x, const Vec &x_true)
{
  if (x.size() != x_true.size()) { throw InvalidArgument("snr: size mismatch"); }
  const double err = (x - x_true).norm();
  if (err == 0.0) { return std::numeric_limits<double>::infinity(); }
  return 20.0 * std::log10(x_true.norm() / err);
}

double rel_err(const Vec &x, const Vec &x_true)
{
  if (x.size() != x_true.size()) { throw InvalidArgument("rel_err: size mismatch"); }
  const double ref = x_true.squaredNorm();
  if (ref == 0.0) { throw InvalidArgument("rel_err: x_true is zero"); }
  return (x - x_true).squaredNorm() / ref;
}

double fixed_point_residual(const Problem &p, double gamma, double lambda, const PDState &u)
{
  const PDState t = apply_T(p, gamma, lambda, u);
  return lambda_norm(PDState{u.v - t.v, u.x - t.x}, lambda);
}

double RateCertificate::bound(std::size_t n) const
{
  return d * std::pow(theta, static_cast<double>(n)) / (1.0 - theta);
}

std::optional<RateCertificate> rate_certificate(const Problem &p, double gamma, double lambda, double alpha_lo,
                                                double alpha_hi, double sigma, std::optional<double> d)
{
  if (!(sigma > 0.0)) { throw InvalidArgument("rate_certificate: sigma must be > 0"); }
  if (!(alpha_lo >= 0.0 && alpha_lo <= alpha_hi && alpha_hi < 1.0)) {
    throw InvalidArgument("rate_certificate: need 0 <= alpha_lo <= alpha_hi < 1");
  }
  validate_step(p, StepParams{gamma, lambda, alpha_lo}, 0);

  double lmin = 0.0;
  switch (p.D.kind()) {
  case LinearOp::Kind::identity: lmin = 1.0; break;
  case LinearOp::Kind::zero: return std::nullopt;
  case LinearOp::Kind::generic: {
    if (p.dual_dim() > 5000 || p.dual_dim() > p.primal_dim()) { return std::nullopt; }
    Vec tmp(p.primal_dim());
    try {
      lmin = min_eigenvalue_spd(
          [&](const Vec &v, Vec &out) {
            p.D.adjoint(v, tmp);
            p.D.forward(tmp, out);
          },
          p.dual_dim());
    } catch (const InvariantViolation &) {
      return std::nullopt;
    }
    break;
  }
  }

  const double mu2 = 1.0 - lambda * lmin;
  const double nu2 = 1.0 - gamma * sigma * (2.0 * p.beta - gamma) / p.beta;
  const double mu = std::sqrt(std::max(mu2, 0.0));
  const double nu = std::sqrt(std::max(nu2, 0.0));
  if (mu >= 1.0 || nu >= 1.0) { return std::nullopt; }
  RateCertificate c;
  c.mu = mu;
  c.nu = nu;
  c.eta = std::max(mu, nu);
  c.theta = alpha_hi + (1.0 - alpha_hi) * c.eta;
  c.d = d.value_or(std::numeric_limits<double>::quiet_NaN());
  if (!(c.theta < 1.0)) { return std::nullopt; }
  return c;
}

bool fejer_check(const RunTrace &trace, const PDState &u_ref, double lambda, double slack)
{
  if (trace.iterates.empty()) {
    if (!trace.records.empty()) { throw InvalidArgument("fejer_check: the trace holds no iterates"); }
    return true;
  }
  auto dist = [&](const PDState &u) { return lambda_norm(PDState{u.v - u_ref.v, u.x - u_ref.x}, lambda); };
  double prev = dist(trace.iterates.front());
  for (std::size_t n = 1; n < trace.iterates.size(); ++n) {
    const double cur = dist(trace.iterates[n]);
    if (cur > prev + slack) { return false; }
    prev = cur;
  }
  return true;
}

std::string format_double(double value)
{
  if (std::isnan(value)) { return "nan"; }
  if (std::isinf(value)) { return value > 0 ? "inf" : "-inf"; }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const RunTrace &trace, std::ostream &out)
{
  out << "iter,gamma,lambda,alpha,objective,residual,snr,relerr,wall_ms\n";
  for (const auto &r : trace.records) {
    out << r.iter << ',' << format_double(r.gamma) << ',' << format_double(r.lambda) << ','
        << format_double(r.alpha) << ',' << format_double(r.objective) << ',' << format_double(r.residual) << ','
        << format_double(r.snr) << ',' << format_double(r.relerr) << ',' << format_double(r.wall_ms) << '\n';
  }
}

void write_trace_csv(const RunTrace &trace, const std::filesystem::path &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw InvalidArgument("cannot open " + path.string() + " for writing"); }
  write_trace_csv(trace, out);
}

} // namespace pdfp
