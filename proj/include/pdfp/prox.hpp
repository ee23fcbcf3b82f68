#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdfp/linops.hpp"
#include "pdfp/types.hpp"

namespace pdfp {

/// A closed proper convex function with a cheap proximity map.
///
/// `prox(t, z)` returns argmin_y t*f(y) + 0.5*||y - z||^2. The scale is passed
/// at call time because the dynamic-stepsize solvers change it every
/// iteration.
class ProxFn {
public:
  using Value = std::function<double(const Vec &)>;
  using Prox = std::function<void(double t, const Vec &z, Vec &out)>;

  ProxFn(Index dim, std::string name, Value value, Prox prox);

  Index dim() const { return dim_; }
  const std::string &name() const { return name_; }

  double value(const Vec &z) const;
  Vec prox(double t, const Vec &z) const;
  void prox(double t, const Vec &z, Vec &out) const;

private:
  Index dim_;
  std::string name_;
  Value value_;
  Prox prox_;
};

using Groups = std::vector<std::vector<Index>>;

Vec l1_prox(double t, const Vec &z);
/// Block soft-thresholding. Throws InvalidArgument unless `groups` partitions [0, z.size()).
Vec group_l2_prox(double t, const Vec &z, const Groups &groups);

ProxFn zero_fn(Index dim);
ProxFn l1_norm(Index dim, double weight = 1.0);
ProxFn group_l2_norm(Index dim, Groups groups, double weight = 1.0);

/// Pixelwise (dx, dy) groups matching the output layout of diff_op_2d.
Groups tv_pixel_groups(Index height, Index width);

/// weight * TV composed with diff_op_2d's output: l1 over every difference
/// (anisotropic) or l2 over each pixel's difference pair (isotropic).
ProxFn tv_norm(Index height, Index width, TvVariant variant, double weight);

/// prox_{t f*}(z) = z - t * prox_{f/t}(z/t).
Vec conjugate_prox(const ProxFn &f, double t, const Vec &z);

struct MoreauParts {
  Vec plus;  ///< prox_{r f}(v)
  Vec minus; ///< r * prox_{f*/r}(v/r)
};

/// Splits v = plus + minus for the scale r (r = gamma/lambda in the solvers).
MoreauParts moreau_decomposition(const ProxFn &f, double r, const Vec &v);

/// || prox_{nu f}(z) - prox_{mu f}((mu/nu) z + (1 - mu/nu) prox_{nu f}(z)) ||.
double resolvent_identity_check(const ProxFn &f, double nu, double mu, const Vec &z);

/// Checks f(w) >= f(x) + <y, w - x> for each probe w (slack 1e-9).
bool subgradient_inequality_holds(const ProxFn &f, const Vec &x, const Vec &y,
                                  std::span<const Vec> probes, double slack = 1e-9);

/// With x = prox(t, z), y = (z - x)/t, verifies y is a subgradient of f at x
/// against the given probes.
bool subgradient_prox_check(const ProxFn &f, double t, const Vec &z, std::span<const Vec> probes);
/// Same, with `n_probes` Gaussian probes scaled to the size of z.
bool subgradient_prox_check(const ProxFn &f, double t, const Vec &z, std::uint64_t seed = 0,
                            int n_probes = 64);

/// f(x) = 0.5 ||A x - b||^2; kept alongside the generic smooth interface so
/// solvers that need the structure (resolvents, SIU, dynamic stepsizes) can use it.
struct QuadraticData {
  LinearOp A;
  Vec b;
};

/// Differentiable convex function with L-Lipschitz gradient (L = 1/beta).
class SmoothFn {
public:
  using Value = std::function<double(const Vec &)>;
  using Grad = std::function<void(const Vec &, Vec &)>;

  SmoothFn(Index dim, Value value, Grad grad, double lipschitz,
           std::optional<QuadraticData> quadratic = std::nullopt);

  Index dim() const { return dim_; }
  double value(const Vec &x) const;
  Vec grad(const Vec &x) const;
  void grad(const Vec &x, Vec &out) const;
  double lipschitz() const { return lipschitz_; }
  const QuadraticData *quadratic() const { return quadratic_ ? &*quadratic_ : nullptr; }

private:
  Index dim_;
  Value value_;
  Grad grad_;
  double lipschitz_;
  std::optional<QuadraticData> quadratic_;
};

SmoothFn quadratic_fn(const LinearOp &A, Vec b, const PowerIterationOptions &opts = {});

} // namespace pdfp
