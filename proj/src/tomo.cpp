#include "pdfp/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pdfp {

void TomoGeometry::validate() const
{
  if (image_side < 1) { throw InvalidArgument("tomography: image side must be >= 1"); }
  if (rays_per_angle < 1) { throw InvalidArgument("tomography: rays per angle must be >= 1"); }
  if (!(spacing > 0.0)) { throw InvalidArgument("tomography: detector spacing must be > 0"); }
  if (angles_deg.empty()) { throw InvalidArgument("tomography: no projection angles"); }
  for (double a : angles_deg) {
    if (!(a >= 0.0 && a < 180.0)) {
      std::ostringstream msg;
      msg << "tomography: angle " << a << " outside [0, 180)";
      throw InvalidArgument(msg.str());
    }
  }
}

TomoGeometry benchmark_geometry(Index image_side)
{
  TomoGeometry g;
  g.image_side = image_side;
  for (int a = 0; a <= 170; a += 10) { g.angles_deg.push_back(a); }
  g.rays_per_angle = 362;
  return g;
}

namespace {

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

constexpr Ellipse kPhantom[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},        {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},       {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},     {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},   {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
};

double snap(double v) { return std::abs(v) < 1e-14 ? 0.0 : v; }

} // namespace

Image shepp_logan(Index n)
{
  if (n < 16) { throw InvalidArgument("shepp_logan: n must be >= 16"); }
  Image img = Image::zeros(n, n);
  const double half = (static_cast<double>(n) - 1.0) / 2.0;
  for (const auto &e : kPhantom) {
    const double phi = e.phi_deg * std::numbers::pi / 180.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    for (Index r = 0; r < n; ++r) {
      const double y = (half - static_cast<double>(r)) / half - e.y0;
      for (Index col = 0; col < n; ++col) {
        const double x = (static_cast<double>(col) - half) / half - e.x0;
        const double xr = x * c + y * s;
        const double yr = -x * s + y * c;
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) { img(r, col) += e.intensity; }
      }
    }
  }
  for (Index i = 0; i < img.size(); ++i) { img.pixels[i] = std::clamp(img.pixels[i], 0.0, 1.0); }
  return img;
}

SparseMatrix build_projection_matrix(const TomoGeometry &g)
{
  g.validate();
  const Index n = g.image_side;
  const double nd = static_cast<double>(n);
  const double center = nd / 2.0;
  const Index p = g.rays_per_angle;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(g.rows()) * static_cast<std::size_t>(2 * n));
  std::vector<double> crossings;
  crossings.reserve(static_cast<std::size_t>(2 * n + 4));

  for (std::size_t ia = 0; ia < g.angles_deg.size(); ++ia) {
    const double theta = g.angles_deg[ia] * std::numbers::pi / 180.0;
    const double nx = snap(std::cos(theta));
    const double ny = snap(std::sin(theta));
    const double dx = -ny;
    const double dy = nx;
    for (Index j = 0; j < p; ++j) {
      const Index row = static_cast<Index>(ia) * p + j;
      const double t = (static_cast<double>(j) - (static_cast<double>(p) - 1.0) / 2.0) * g.spacing;
      const double px = center + t * nx;
      const double py = center + t * ny;

      // Clip the line px + s d to the box [0, n]^2.
      double s_lo = -std::numeric_limits<double>::infinity();
      double s_hi = std::numeric_limits<double>::infinity();
      bool miss = false;
      auto clip = [&](double pos, double dir) {
        if (dir == 0.0) {
          if (pos < 0.0 || pos > nd) { miss = true; }
          return;
        }
        double a = (0.0 - pos) / dir;
        double b = (nd - pos) / dir;
        if (a > b) { std::swap(a, b); }
        s_lo = std::max(s_lo, a);
        s_hi = std::min(s_hi, b);
      };
      clip(px, dx);
      clip(py, dy);
      if (miss || !(s_hi > s_lo)) { continue; }

      crossings.clear();
      crossings.push_back(s_lo);
      crossings.push_back(s_hi);
      for (Index k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        if (dx != 0.0) {
          const double s = (kk - px) / dx;
          if (s > s_lo && s < s_hi) { crossings.push_back(s); }
        }
        if (dy != 0.0) {
          const double s = (kk - py) / dy;
          if (s > s_lo && s < s_hi) { crossings.push_back(s); }
        }
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); ++k) {
        const double len = crossings[k + 1] - crossings[k];
        if (len <= 1e-12) { continue; }
        const double sm = 0.5 * (crossings[k] + crossings[k + 1]);
        const double mx = px + sm * dx;
        const double my = py + sm * dy;
        // Half-open cells: an edge tie lands in the larger column / larger row index.
        const auto col = static_cast<Index>(std::floor(mx));
        const Index r = n - static_cast<Index>(std::ceil(my));
        if (col < 0 || col >= n || r < 0 || r >= n) { continue; }
        triplets.push_back(Triplet{row, r * n + col, len});
      }
    }
  }
  return SparseMatrix(g.rows(), g.cols(), triplets);
}

Vec add_relative_noise(const Vec &clean, double level, std::uint64_t seed, std::string_view stream)
{
  if (!(level >= 0.0)) { throw InvalidArgument("noise level must be >= 0"); }
  if (level == 0.0) { return clean; }
  auto rng = named_stream(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec e(clean.size());
  for (Index i = 0; i < e.size(); ++i) { e[i] = normal(rng); }
  e *= level * clean.norm() / e.norm();
  return clean + e;
}

TomoProblem make_tomo_problem(const TomoGeometry &g, double noise_level, std::uint64_t seed)
{
  if (!(noise_level >= 0.0)) { throw InvalidArgument("make_tomo_problem: noise level must be >= 0"); }
  SparseMatrix A = build_projection_matrix(g);
  Image x_true = shepp_logan(g.image_side);
  Vec clean = A.multiply(x_true.pixels);
  Vec b = add_relative_noise(clean, noise_level, seed);
  return TomoProblem{g, std::move(A), std::move(b), std::move(x_true), noise_level};
}

Problem make_image_problem(const LinearOp &A, const Vec &b, Index height, Index width, double reg_weight,
                           TvVariant variant, const PowerIterationOptions &opts)
{
  if (!(reg_weight > 0.0)) { throw InvalidArgument("regularization weight must be > 0"); }
  if (A.in_dim() != height * width || b.size() != A.out_dim()) {
    throw InvalidArgument("make_image_problem: A, b and the image shape disagree");
  }
  return make_problem(tv_norm(height, width, variant, reg_weight), quadratic_fn(A, b, opts),
                      diff_op_2d(height, width), opts);
}

Problem make_tv_problem(const TomoProblem &t, double reg_weight, TvVariant variant,
                        const PowerIterationOptions &opts)
{
  const Index n = t.geometry.image_side;
  return make_image_problem(matrix_op(t.A), t.b, n, n, reg_weight, variant, opts);
}

Problem make_denoise_problem(const Image &noisy, double mu, TvVariant variant, const PowerIterationOptions &opts)
{
  return make_image_problem(identity_op(noisy.size()), noisy.pixels, noisy.height, noisy.width, mu, variant, opts);
}

} // namespace pdfp
