#pragma once

#include <algorithm>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pdfp/diagnostics.hpp"
#include "pdfp/problem.hpp"
#include "pdfp/solvers.hpp"
#include "pdfp/tomo.hpp"

namespace pdfp::testing {

inline Vec random_vec(std::mt19937_64 &rng, Index n, double scale = 1.0)
{
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) { v[i] = g(rng); }
  return v;
}

// min 0.1|x| + 0.5 (x - 1)^2, solution 0.9.
inline Problem scalar_problem()
{
  return make_problem(l1_norm(1, 0.1), quadratic_fn(identity_op(1), Vec::Ones(1)), identity_op(1));
}

// min 0.1 ||x||_1 + 0.5 ||A x - b||^2 with a random 8x5 A.
inline Problem lasso_problem()
{
  auto rng = named_stream(7, "lasso");
  Mat A(8, 5);
  for (Index i = 0; i < A.size(); ++i) { A.data()[i] = std::normal_distribution<double>(0.0, 1.0)(rng); }
  const Vec b = random_vec(rng, 8);
  return make_problem(l1_norm(5, 0.1), quadratic_fn(dense_op(A), b), identity_op(5));
}

inline Image blocks4()
{
  Image img = Image::zeros(4, 4);
  const double vals[16] = {1.0, 1.0, 0.2, 0.2, 1.0, 1.0, 0.2, 0.2, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0};
  for (Index i = 0; i < 16; ++i) { img.pixels[i] = vals[i]; }
  return img;
}

// 4x4 piecewise-constant image with a fixed perturbation, mu = 0.2.
inline Problem denoise4_problem()
{
  Image noisy = blocks4();
  auto rng = named_stream(3, "denoise4");
  noisy.pixels += random_vec(rng, 16, 0.1);
  return make_denoise_problem(noisy, 0.2, TvVariant::anisotropic);
}

inline Image blocks8()
{
  Image img = Image::zeros(8, 8);
  for (Index r = 0; r < 8; ++r) {
    for (Index c = 0; c < 8; ++c) { img(r, c) = (r >= 2 && r < 6 && c >= 3 && c < 7) ? 1.0 : (c < 2 ? 0.4 : 0.0); }
  }
  return img;
}

// 8x8 Gaussian-blurred blocks, mu = 0.02.
inline Problem deblur8_problem()
{
  const Image truth = blocks8();
  const LinearOp K = gaussian_blur_op(8, 8, 1, 1.0);
  const Vec b = add_relative_noise(K.forward(truth.pixels), 0.02, 5);
  return make_image_problem(K, b, 8, 8, 0.02, TvVariant::anisotropic);
}

inline double dist_lambda(const PDState &a, const PDState &b, double lambda)
{
  return lambda_norm(PDState{a.v - b.v, a.x - b.x}, lambda);
}

inline PDState random_state(std::mt19937_64 &rng, const Problem &p, double scale = 1.0)
{
  return PDState{random_vec(rng, p.dual_dim(), scale), random_vec(rng, p.primal_dim(), scale)};
}

} // namespace pdfp::testing
