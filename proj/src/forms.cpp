#include "pdfp/solvers.hpp"

namespace pdfp {

CpFormState cp_form_from_state(const Problem &p, double gamma, double lambda, const PDState &u)
{
  CpFormState s;
  s.vbar = (lambda / gamma) * u.v;
  s.x = u.x;
  s.y = u.x - gamma * p.f2.grad(u.x) - gamma * p.D.adjoint(s.vbar);
  return s;
}

CpFormState cp_form_step(const Problem &p, double gamma, double lambda, const CpFormState &s)
{
  const double sigma = lambda / gamma;
  CpFormState out;
  out.vbar = conjugate_prox(p.f1, sigma, s.vbar + sigma * p.D.forward(s.y));
  const Vec dtv = p.D.adjoint(out.vbar);
  out.x = s.x - gamma * p.f2.grad(s.x) - gamma * dtv;
  out.y = out.x - gamma * p.f2.grad(out.x) - gamma * dtv;
  return out;
}

SplitState siu_step(const Problem &p, double delta, double nu, const SplitState &s)
{
  SplitState out;
  const Vec q = p.D.forward(s.x) - s.d + s.v;
  out.x = s.x - delta * p.f2.grad(s.x) - delta * nu * p.D.adjoint(q);
  const Vec w = p.D.forward(out.x) + s.v;
  out.d = p.f1.prox(1.0 / nu, w);
  out.v = w - out.d;
  return out;
}

SplitState ds_split_form_step(const Problem &p, double delta, double nu, const SplitState &s)
{
  const double gamma = delta;
  const double lambda = delta * nu;
  const Vec e = p.D.forward(s.x) - s.d;
  SplitState out;
  out.x = s.x - lambda * p.D.adjoint(e + s.v) - gamma * p.f2.grad(s.x - lambda * p.D.adjoint(e));
  const Vec w = p.D.forward(out.x) + s.v;
  out.d = p.f1.prox(1.0 / nu, w);
  out.v = w - out.d;
  return out;
}

} // namespace pdfp
