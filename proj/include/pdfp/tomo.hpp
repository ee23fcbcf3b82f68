#pragma once

#include <cstdint>
#include <vector>

#include "pdfp/linops.hpp"
#include "pdfp/problem.hpp"
#include "pdfp/types.hpp"

namespace pdfp {

/// Parallel-beam geometry on an N x N grid of unit pixels. Rays at each angle
/// are offset by (j - (p-1)/2) * spacing from the image center.
struct TomoGeometry {
  Index image_side = 256;
  std::vector<double> angles_deg;
  Index rays_per_angle = 362;
  double spacing = 1.0;

  Index rows() const { return static_cast<Index>(angles_deg.size()) * rays_per_angle; }
  Index cols() const { return image_side * image_side; }
  void validate() const;
};

/// 18 angles 0:10:170, p = 362 rays, unit detector spacing.
TomoGeometry benchmark_geometry(Index image_side = 256);

/// Modified (higher contrast) Shepp-Logan phantom, values in [0, 1]. Row 0 is
/// the top of the image.
Image shepp_logan(Index n);

/// Line-length (Siddon) system matrix: row (angle i, ray j) = i*p + j holds the
/// length of the ray inside each pixel. A ray running exactly along a pixel
/// edge is credited to the pixel with the larger index.
SparseMatrix build_projection_matrix(const TomoGeometry &g);

struct TomoProblem {
  TomoGeometry geometry;
  SparseMatrix A;
  Vec b;
  Image x_true;
  double noise_level;
};

/// b = A x_true + e with e Gaussian, scaled so ||e|| / ||A x_true|| = noise_level.
TomoProblem make_tomo_problem(const TomoGeometry &g, double noise_level, std::uint64_t seed);

/// Adds Gaussian noise of relative magnitude `level` to `clean` using the named stream.
Vec add_relative_noise(const Vec &clean, double level, std::uint64_t seed, std::string_view stream = "noise");

/// f1 = reg_weight TV(.), f2 = 0.5 ||A x - b||^2, D = diff_op_2d.
Problem make_tv_problem(const TomoProblem &t, double reg_weight, TvVariant variant,
                        const PowerIterationOptions &opts = {});

/// Same with an arbitrary forward operator A on an h x w image.
Problem make_image_problem(const LinearOp &A, const Vec &b, Index height, Index width, double reg_weight,
                           TvVariant variant, const PowerIterationOptions &opts = {});

/// min 0.5 ||x - b||^2 + mu TV(x).
Problem make_denoise_problem(const Image &noisy, double mu, TvVariant variant,
                             const PowerIterationOptions &opts = {});

} // namespace pdfp
