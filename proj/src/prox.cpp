#include "pdfp/prox.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pdfp {

namespace {

void require_positive(const char *what, double t)
{
  if (!(t > 0.0)) {
    std::ostringstream msg;
    msg << what << ": scale must be > 0 (got " << t << ")";
    throw InvalidArgument(msg.str());
  }
}

void validate_partition(Index dim, const Groups &groups)
{
  std::vector<char> seen(static_cast<std::size_t>(dim), 0);
  Index covered = 0;
  for (const auto &g : groups) {
    for (Index i : g) {
      if (i < 0 || i >= dim) { throw InvalidArgument("group_l2: group index out of range"); }
      if (seen[i]) { throw InvalidArgument("group_l2: groups overlap"); }
      seen[i] = 1;
      ++covered;
    }
  }
  if (covered != dim) { throw InvalidArgument("group_l2: groups do not cover every index"); }
}

void group_shrink(double t, const Vec &z, const Groups &groups, Vec &out)
{
  out.resize(z.size());
  for (const auto &g : groups) {
    double sq = 0.0;
    for (Index i : g) { sq += z[i] * z[i]; }
    const double norm = std::sqrt(sq);
    const double scale = norm > t ? 1.0 - t / norm : 0.0;
    for (Index i : g) { out[i] = scale * z[i]; }
  }
}

double group_norm_sum(const Vec &z, const Groups &groups)
{
  double total = 0.0;
  for (const auto &g : groups) {
    double sq = 0.0;
    for (Index i : g) { sq += z[i] * z[i]; }
    total += std::sqrt(sq);
  }
  return total;
}

} // namespace

ProxFn::ProxFn(Index dim, std::string name, Value value, Prox prox)
    : dim_(dim), name_(std::move(name)), value_(std::move(value)), prox_(std::move(prox))
{
  if (dim <= 0) { throw InvalidArgument("ProxFn: dim must be positive"); }
}

double ProxFn::value(const Vec &z) const
{
  if (z.size() != dim_) { throw InvalidArgument(name_ + ": dimension mismatch"); }
  return value_(z);
}

Vec ProxFn::prox(double t, const Vec &z) const
{
  Vec out(dim_);
  prox(t, z, out);
  return out;
}

void ProxFn::prox(double t, const Vec &z, Vec &out) const
{
  require_positive(name_.c_str(), t);
  if (z.size() != dim_) { throw InvalidArgument(name_ + ": dimension mismatch"); }
  out.resize(dim_);
  prox_(t, z, out);
}

Vec l1_prox(double t, const Vec &z)
{
  require_positive("l1_prox", t);
  return z.unaryExpr([t](double zi) { return std::copysign(std::max(std::abs(zi) - t, 0.0), zi); });
}

Vec group_l2_prox(double t, const Vec &z, const Groups &groups)
{
  require_positive("group_l2_prox", t);
  validate_partition(z.size(), groups);
  Vec out;
  group_shrink(t, z, groups, out);
  return out;
}

ProxFn zero_fn(Index dim)
{
  return ProxFn(
      dim, "zero", [](const Vec &) { return 0.0; },
      [](double, const Vec &z, Vec &out) { out = z; });
}

ProxFn l1_norm(Index dim, double weight)
{
  if (!(weight >= 0.0)) { throw InvalidArgument("l1_norm: weight must be >= 0"); }
  return ProxFn(
      dim, "l1", [weight](const Vec &z) { return weight * z.lpNorm<1>(); },
      [weight](double t, const Vec &z, Vec &out) {
        const double thr = t * weight;
        for (Index i = 0; i < z.size(); ++i) {
          out[i] = std::copysign(std::max(std::abs(z[i]) - thr, 0.0), z[i]);
        }
      });
}

ProxFn group_l2_norm(Index dim, Groups groups, double weight)
{
  if (!(weight >= 0.0)) { throw InvalidArgument("group_l2_norm: weight must be >= 0"); }
  validate_partition(dim, groups);
  auto shared = std::make_shared<const Groups>(std::move(groups));
  return ProxFn(
      dim, "group_l2", [shared, weight](const Vec &z) { return weight * group_norm_sum(z, *shared); },
      [shared, weight](double t, const Vec &z, Vec &out) { group_shrink(t * weight, z, *shared, out); });
}

Groups tv_pixel_groups(Index height, Index width)
{
  const Index hw = height * width;
  Groups groups(static_cast<std::size_t>(hw));
  for (Index i = 0; i < hw; ++i) { groups[i] = {i, hw + i}; }
  return groups;
}

ProxFn tv_norm(Index height, Index width, TvVariant variant, double weight)
{
  const Index m = 2 * height * width;
  if (variant == TvVariant::anisotropic) { return l1_norm(m, weight); }
  return group_l2_norm(m, tv_pixel_groups(height, width), weight);
}

Vec conjugate_prox(const ProxFn &f, double t, const Vec &z)
{
  require_positive("conjugate_prox", t);
  return z - t * f.prox(1.0 / t, z / t);
}

MoreauParts moreau_decomposition(const ProxFn &f, double r, const Vec &v)
{
  require_positive("moreau_decomposition", r);
  MoreauParts parts;
  parts.plus = f.prox(r, v);
  parts.minus = r * conjugate_prox(f, 1.0 / r, v / r);
  return parts;
}

double resolvent_identity_check(const ProxFn &f, double nu, double mu, const Vec &z)
{
  require_positive("resolvent_identity_check (nu)", nu);
  require_positive("resolvent_identity_check (mu)", mu);
  const Vec p_nu = f.prox(nu, z);
  const double ratio = mu / nu;
  const Vec rhs = f.prox(mu, ratio * z + (1.0 - ratio) * p_nu);
  return (p_nu - rhs).norm();
}

bool subgradient_inequality_holds(const ProxFn &f, const Vec &x, const Vec &y,
                                  std::span<const Vec> probes, double slack)
{
  const double fx = f.value(x);
  for (const auto &w : probes) {
    if (f.value(w) < fx + y.dot(w - x) - slack) { return false; }
  }
  return true;
}

bool subgradient_prox_check(const ProxFn &f, double t, const Vec &z, std::span<const Vec> probes)
{
  const Vec x = f.prox(t, z);
  const Vec y = (z - x) / t;
  // (z - x)/t is a subgradient of f itself, not of t*f.
  return subgradient_inequality_holds(f, x, y, probes);
}

bool subgradient_prox_check(const ProxFn &f, double t, const Vec &z, std::uint64_t seed, int n_probes)
{
  auto rng = named_stream(seed, "subgradient_probes");
  std::normal_distribution<double> dist(0.0, 1.0);
  const double scale = 1.0 + z.lpNorm<Eigen::Infinity>();
  std::vector<Vec> probes;
  probes.reserve(static_cast<std::size_t>(n_probes) + 1);
  probes.push_back(Vec::Zero(z.size()));
  for (int k = 0; k < n_probes; ++k) {
    Vec w(z.size());
    for (Index i = 0; i < w.size(); ++i) { w[i] = scale * dist(rng); }
    probes.push_back(std::move(w));
  }
  return subgradient_prox_check(f, t, z, probes);
}

SmoothFn::SmoothFn(Index dim, Value value, Grad grad, double lipschitz,
                   std::optional<QuadraticData> quadratic)
    : dim_(dim), value_(std::move(value)), grad_(std::move(grad)), lipschitz_(lipschitz),
      quadratic_(std::move(quadratic))
{
  if (dim <= 0) { throw InvalidArgument("SmoothFn: dim must be positive"); }
  if (!(lipschitz >= 0.0)) { throw InvalidArgument("SmoothFn: lipschitz constant must be >= 0"); }
}

double SmoothFn::value(const Vec &x) const
{
  if (x.size() != dim_) { throw InvalidArgument("SmoothFn::value: dimension mismatch"); }
  return value_(x);
}

Vec SmoothFn::grad(const Vec &x) const
{
  Vec out(dim_);
  grad(x, out);
  return out;
}

void SmoothFn::grad(const Vec &x, Vec &out) const
{
  if (x.size() != dim_) { throw InvalidArgument("SmoothFn::grad: dimension mismatch"); }
  out.resize(dim_);
  grad_(x, out);
}

SmoothFn quadratic_fn(const LinearOp &A, Vec b, const PowerIterationOptions &opts)
{
  if (b.size() != A.out_dim()) {
    std::ostringstream msg;
    msg << "quadratic_fn: b has size " << b.size() << " but A maps to dimension " << A.out_dim();
    throw InvalidArgument(msg.str());
  }
  const double lipschitz = op_norm_sq(A, opts);
  QuadraticData data{A, std::move(b)};
  auto shared = std::make_shared<const QuadraticData>(data);
  return SmoothFn(
      A.in_dim(),
      [shared](const Vec &x) { return 0.5 * (shared->A.forward(x) - shared->b).squaredNorm(); },
      [shared](const Vec &x, Vec &out) {
        const Vec r = shared->A.forward(x) - shared->b;
        shared->A.adjoint(r, out);
      },
      lipschitz, std::move(data));
}

} // namespace pdfp
