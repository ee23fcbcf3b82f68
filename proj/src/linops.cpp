#include "pdfp/linops.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace pdfp {

namespace {

void check_dim(const char *what, Index expected, Index got)
{
  if (expected != got) {
    std::ostringstream msg;
    msg << what << ": expected dimension " << expected << ", got " << got;
    throw InvalidArgument(msg.str());
  }
}

Vec random_unit(Index n, std::uint64_t seed, std::string_view stream)
{
  auto rng = named_stream(seed, stream);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec q(n);
  for (Index i = 0; i < n; ++i) { q[i] = dist(rng); }
  return q / q.norm();
}

// Half-sample symmetric reflection of an index into [0, n).
Index reflect(Index i, Index n)
{
  if (i < 0) { return -i - 1; }
  if (i >= n) { return 2 * n - i - 1; }
  return i;
}

} // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols, std::span<const Triplet> triplets)
    : m_(rows, cols)
{
  if (rows <= 0 || cols <= 0) { throw InvalidArgument("SparseMatrix: dimensions must be positive"); }
  std::vector<Eigen::Triplet<double, Index>> ts;
  ts.reserve(triplets.size());
  for (const auto &t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      std::ostringstream msg;
      msg << "SparseMatrix: triplet (" << t.row << ", " << t.col << ") out of range for " << rows
          << "x" << cols;
      throw InvalidArgument(msg.str());
    }
    ts.emplace_back(t.row, t.col, t.value);
  }
  m_.setFromTriplets(ts.begin(), ts.end());
  m_.makeCompressed();
}

Vec SparseMatrix::multiply(const Vec &x) const
{
  check_dim("SparseMatrix::multiply", cols(), x.size());
  return m_ * x;
}

Vec SparseMatrix::multiply_transpose(const Vec &y) const
{
  check_dim("SparseMatrix::multiply_transpose", rows(), y.size());
  return m_.transpose() * y;
}

LinearOp::LinearOp(Index in_dim, Index out_dim, Apply forward, Apply adjoint, Kind kind,
                   std::string name)
    : in_dim_(in_dim), out_dim_(out_dim), forward_(std::move(forward)),
      adjoint_(std::move(adjoint)), kind_(kind), name_(std::move(name))
{
  if (in_dim <= 0 || out_dim <= 0) { throw InvalidArgument("LinearOp: dimensions must be positive"); }
}

Vec LinearOp::forward(const Vec &x) const
{
  Vec out(out_dim_);
  forward(x, out);
  return out;
}

Vec LinearOp::adjoint(const Vec &v) const
{
  Vec out(in_dim_);
  adjoint(v, out);
  return out;
}

void LinearOp::forward(const Vec &x, Vec &out) const
{
  check_dim(name_.c_str(), in_dim_, x.size());
  out.resize(out_dim_);
  forward_(x, out);
}

void LinearOp::adjoint(const Vec &v, Vec &out) const
{
  check_dim(name_.c_str(), out_dim_, v.size());
  out.resize(in_dim_);
  adjoint_(v, out);
}

LinearOp identity_op(Index n)
{
  auto copy = [](const Vec &in, Vec &out) { out = in; };
  return LinearOp(n, n, copy, copy, LinearOp::Kind::identity, "identity");
}

LinearOp zero_op(Index in_dim, Index out_dim)
{
  auto zero = [](const Vec &, Vec &out) { out.setZero(); };
  return LinearOp(in_dim, out_dim, zero, zero, LinearOp::Kind::zero, "zero");
}

LinearOp matrix_op(SparseMatrix m)
{
  auto shared = std::make_shared<const SparseMatrix>(std::move(m));
  return LinearOp(
      shared->cols(), shared->rows(),
      [shared](const Vec &x, Vec &out) { out.noalias() = shared->storage() * x; },
      [shared](const Vec &y, Vec &out) { out.noalias() = shared->storage().transpose() * y; },
      LinearOp::Kind::generic, "matrix");
}

LinearOp dense_op(Mat m)
{
  auto shared = std::make_shared<const Mat>(std::move(m));
  return LinearOp(
      shared->cols(), shared->rows(), [shared](const Vec &x, Vec &out) { out.noalias() = *shared * x; },
      [shared](const Vec &y, Vec &out) { out.noalias() = shared->transpose() * y; },
      LinearOp::Kind::generic, "dense");
}

LinearOp diff_op_2d(Index height, Index width)
{
  if (height < 2 || width < 2) { throw InvalidArgument("diff_op_2d: height and width must be >= 2"); }
  const Index h = height;
  const Index w = width;
  const Index hw = h * w;

  auto forward = [h, w, hw](const Vec &x, Vec &out) {
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const Index i = r * w + c;
        out[i] = (c + 1 < w) ? x[i + 1] - x[i] : 0.0;
        out[hw + i] = (r + 1 < h) ? x[i + w] - x[i] : 0.0;
      }
    }
  };
  auto adjoint = [h, w, hw](const Vec &p, Vec &out) {
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const Index i = r * w + c;
        double acc = 0.0;
        if (c > 0) { acc += p[i - 1]; }
        if (c + 1 < w) { acc -= p[i]; }
        if (r > 0) { acc += p[hw + i - w]; }
        if (r + 1 < h) { acc -= p[hw + i]; }
        out[i] = acc;
      }
    }
  };
  return LinearOp(hw, 2 * hw, forward, adjoint, LinearOp::Kind::generic, "diff_op_2d");
}

std::vector<double> gaussian_kernel_1d(int radius, double sigma)
{
  if (radius < 1) { throw InvalidArgument("gaussian kernel: radius must be >= 1"); }
  if (!(sigma > 0.0)) { throw InvalidArgument("gaussian kernel: sigma must be > 0"); }
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-double(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (auto &x : k) { x /= sum; }
  return k;
}

LinearOp gaussian_blur_op(Index height, Index width, int radius, double sigma)
{
  if (height < 1 || width < 1) { throw InvalidArgument("gaussian_blur_op: empty image"); }
  auto kernel = gaussian_kernel_1d(radius, sigma);
  if (radius > height || radius > width) {
    throw InvalidArgument("gaussian_blur_op: radius exceeds image size");
  }
  const Index h = height;
  const Index w = width;
  auto apply = [h, w, radius, kernel](const Vec &x, Vec &out) {
    Vec tmp(h * w);
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) { acc += kernel[k + radius] * x[r * w + reflect(c + k, w)]; }
        tmp[r * w + c] = acc;
      }
    }
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) { acc += kernel[k + radius] * tmp[reflect(r + k, h) * w + c]; }
        out[r * w + c] = acc;
      }
    }
  };
  return LinearOp(h * w, h * w, apply, apply, LinearOp::Kind::generic, "gaussian_blur");
}

double max_eigenvalue(const SymmetricApply &apply, Index n, const PowerIterationOptions &opts)
{
  if (!(opts.tol > 0.0)) { throw InvalidArgument("power iteration: tol must be > 0"); }
  Vec q = random_unit(n, opts.seed, "power_iteration");
  Vec y(n);
  double estimate = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    apply(q, y);
    // ||B q|| for unit q bounds lambda_max from below and dominates the Rayleigh quotient.
    const double next = y.norm();
    if (next == 0.0) { return 0.0; }
    q = y / next;
    if (it > 0 && std::abs(next - estimate) <= opts.tol * next * 1e-2) { return next; }
    estimate = next;
  }
  throw NonConvergence("power iteration did not converge", estimate);
}

double op_norm_sq(const LinearOp &D, const PowerIterationOptions &opts)
{
  if (D.kind() == LinearOp::Kind::zero) { return 0.0; }
  if (D.kind() == LinearOp::Kind::identity) { return 1.0; }
  if (D.in_dim() <= D.out_dim()) {
    Vec tmp(D.out_dim());
    return max_eigenvalue(
        [&](const Vec &x, Vec &out) {
          D.forward(x, tmp);
          D.adjoint(tmp, out);
        },
        D.in_dim(), opts);
  }
  Vec tmp(D.in_dim());
  return max_eigenvalue(
      [&](const Vec &v, Vec &out) {
        D.adjoint(v, tmp);
        D.forward(tmp, out);
      },
      D.out_dim(), opts);
}

CgResult conjugate_gradient(const SymmetricApply &apply, const Vec &rhs, const Vec &x0, double tol,
                            int max_iter)
{
  CgResult res;
  res.x = x0;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  Vec ap(rhs.size());
  apply(res.x, ap);
  Vec r = rhs - ap;
  Vec p = r;
  double rr = r.squaredNorm();
  res.relative_residual = std::sqrt(rr) / rhs_norm;
  if (res.relative_residual <= tol) {
    res.converged = true;
    return res;
  }
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) { break; }
    const double step = rr / pap;
    res.x += step * p;
    r -= step * ap;
    const double rr_next = r.squaredNorm();
    res.iterations = it;
    res.relative_residual = std::sqrt(rr_next) / rhs_norm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return res;
}

double min_eigenvalue_spd(const SymmetricApply &apply, Index n, const PowerIterationOptions &opts)
{
  Vec q = random_unit(n, opts.seed, "inverse_power_iteration");
  double estimate = 0.0;
  const int cg_budget = static_cast<int>(std::min<Index>(10 * n + 100, 100000));
  for (int it = 0; it < opts.max_iter; ++it) {
    auto solve = conjugate_gradient(apply, q, q, 1e-12, cg_budget);
    if (!solve.converged) {
      throw InvariantViolation("inverse power iteration: operator is singular or too ill-conditioned");
    }
    const double growth = solve.x.norm();
    q = solve.x / growth;
    if (it > 0 && std::abs(growth - estimate) <= opts.tol * growth * 1e-2) { return 1.0 / growth; }
    estimate = growth;
  }
  throw NonConvergence("inverse power iteration did not converge", 1.0 / estimate);
}

} // namespace pdfp
