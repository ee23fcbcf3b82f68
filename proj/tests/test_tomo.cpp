#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "pdfp/image_io.hpp"

using namespace pdfp;

namespace {

TomoGeometry single_angle(Index n, double angle, Index rays)
{
  TomoGeometry g;
  g.image_side = n;
  g.angles_deg = {angle};
  g.rays_per_angle = rays;
  return g;
}

} // namespace

TEST(SheppLogan, ValuesInUnitIntervalAndZeroCorners)
{
  const Image img = shepp_logan(64);
  EXPECT_GE(img.pixels.minCoeff(), 0.0);
  EXPECT_LE(img.pixels.maxCoeff(), 1.0);
  EXPECT_EQ(img(0, 0), 0.0);
  EXPECT_EQ(img(0, 63), 0.0);
  EXPECT_EQ(img(63, 0), 0.0);
  EXPECT_EQ(img(63, 63), 0.0);
  EXPECT_DOUBLE_EQ(img.pixels.maxCoeff(), 1.0);
}

TEST(SheppLogan, MirrorSymmetricAwayFromAsymmetricFeatures)
{
  const Index n = 128;
  const Image img = shepp_logan(n);
  const double half = (n - 1) / 2.0;
  // The tilted ellipses sit in |y| < 0.42 and the small ones below y = -0.5.
  for (Index r = 0; r < n; ++r) {
    const double y = (half - r) / half;
    if (std::abs(y) < 0.45 || y < -0.5) { continue; }
    for (Index c = 0; c < n; ++c) { ASSERT_EQ(img(r, c), img(r, n - 1 - c)) << r << "," << c; }
  }
}

TEST(SheppLogan, RejectsTinyImages)
{
  EXPECT_THROW(shepp_logan(8), InvalidArgument);
}

TEST(Projection, AxisAlignedRayThroughColumnHasLengthN)
{
  const Index n = 16;
  const SparseMatrix A = build_projection_matrix(single_angle(n, 0.0, n));
  const Mat dense = A.to_dense();
  for (Index j = 0; j < n; ++j) {
    EXPECT_NEAR(dense.row(j).sum(), static_cast<double>(n), 1e-12);
    EXPECT_EQ((dense.row(j).array() > 0).count(), n);
  }
}

TEST(Projection, ConstantImageGivesChordLengths)
{
  const Index n = 20;
  const double theta = 30.0 * std::acos(-1.0) / 180.0;
  const Index rays = 31;
  const SparseMatrix A = build_projection_matrix(single_angle(n, 30.0, rays));
  const Vec proj = A.multiply(Vec::Ones(n * n));
  // Independent chord length: clip the line against the square by brute-force sampling of the
  // parametric range.
  for (Index j = 0; j < rays; ++j) {
    const double t = j - (rays - 1) / 2.0;
    const double px = n / 2.0 + t * std::cos(theta);
    const double py = n / 2.0 + t * std::sin(theta);
    const double dx = -std::sin(theta);
    const double dy = std::cos(theta);
    double lo = 1e300, hi = -1e300;
    for (int k = -400000; k <= 400000; ++k) {
      const double s = k * 1e-4;
      const double x = px + s * dx;
      const double y = py + s * dy;
      if (x >= 0 && x <= n && y >= 0 && y <= n) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    const double chord = hi > lo ? hi - lo : 0.0;
    EXPECT_NEAR(proj[j], chord, 2e-4) << "ray " << j;
  }
}

TEST(Projection, EntriesAreNonnegativeAndRaysOutsideMiss)
{
  TomoGeometry g = benchmark_geometry(32);
  g.rays_per_angle = 80; // wider than the image diagonal
  const SparseMatrix A = build_projection_matrix(g);
  EXPECT_EQ(A.rows(), 18 * 80);
  EXPECT_EQ(A.cols(), 32 * 32);
  const Mat dense = A.to_dense();
  EXPECT_GE(dense.minCoeff(), 0.0);
  EXPECT_EQ(dense.row(0).norm(), 0.0);
  EXPECT_EQ(A.multiply_transpose(Vec::Zero(A.rows())).norm(), 0.0);
}

TEST(Projection, EdgeTieCreditsLargerIndex)
{
  // Even ray count at angle 0 puts rays on the vertical pixel edges x = k.
  const Index n = 16;
  TomoGeometry g = single_angle(n, 0.0, 3);
  const SparseMatrix A = build_projection_matrix(g);
  const Mat dense = A.to_dense();
  // Ray 1 runs along x = 8: every credited pixel sits in column 8.
  for (Index k = 0; k < dense.cols(); ++k) {
    if (dense(1, k) != 0.0) { EXPECT_EQ(k % n, 8); }
  }
  EXPECT_NEAR(dense.row(1).sum(), 16.0, 1e-12);
}

TEST(Projection, MassPerPixelAtZeroDegrees)
{
  const Index n = 16;
  const SparseMatrix A = build_projection_matrix(single_angle(n, 0.0, n));
  const Vec col_mass = A.multiply_transpose(Vec::Ones(n));
  EXPECT_LE((col_mass - Vec::Ones(n * n)).norm(), 1e-12);
}

TEST(TomoProblem, NoiseLevelIsExact)
{
  const TomoGeometry g = benchmark_geometry(32);
  const TomoProblem clean = make_tomo_problem(g, 0.0, 1);
  const Vec ax = clean.A.multiply(clean.x_true.pixels);
  EXPECT_EQ(clean.b, ax);
  const TomoProblem noisy = make_tomo_problem(g, 0.01, 1);
  EXPECT_NEAR((noisy.b - ax).norm() / ax.norm(), 0.01, 1e-9);
}

TEST(TomoProblem, SameSeedIsBitIdentical)
{
  const TomoGeometry g = benchmark_geometry(32);
  const TomoProblem a = make_tomo_problem(g, 0.01, 9);
  const TomoProblem b = make_tomo_problem(g, 0.01, 9);
  const TomoProblem c = make_tomo_problem(g, 0.01, 10);
  EXPECT_EQ(a.b, b.b);
  EXPECT_NE(a.b, c.b);
}

TEST(TomoProblem, GeometryValidation)
{
  TomoGeometry g = benchmark_geometry(32);
  g.angles_deg.push_back(180.0);
  EXPECT_THROW(build_projection_matrix(g), InvalidArgument);
  EXPECT_THROW(make_tomo_problem(benchmark_geometry(32), -0.1, 1), InvalidArgument);
}

TEST(PaperGeometry, EighteenAnglesAndDiagonalDetector)
{
  const TomoGeometry g = benchmark_geometry();
  ASSERT_EQ(g.angles_deg.size(), 18u);
  EXPECT_EQ(g.angles_deg.front(), 0.0);
  EXPECT_EQ(g.angles_deg.back(), 170.0);
  EXPECT_EQ(g.rays_per_angle, 362);
}

TEST(TvProblem, HugeWeightGivesConstantImageAtMean)
{
  Image noisy = pdfp::testing::blocks4();
  const Problem p = make_denoise_problem(noisy, 1e3, TvVariant::anisotropic);
  const SolveResult r = pdfp2o(p, 1.0, p.lambda_bound(), zero_state(p), StoppingRule{1e-14, 200000});
  // Brute force over constant images c: 0.5 ||c - b||^2 is minimized at the mean.
  double best_c = 0.0;
  double best = 1e300;
  for (int k = 0; k <= 100000; ++k) {
    const double c = k * 1e-5;
    const double val = 0.5 * (Vec::Constant(16, c) - noisy.pixels).squaredNorm();
    if (val < best) {
      best = val;
      best_c = c;
    }
  }
  EXPECT_NEAR(r.state.x.mean(), best_c, 1e-5);
  EXPECT_LE((r.state.x.array() - r.state.x.mean()).abs().maxCoeff(), 1e-8);
}

TEST(TvProblem, TinyWeightApproachesData)
{
  const Image noisy = pdfp::testing::blocks4();
  const Problem p = make_denoise_problem(noisy, 1e-9, TvVariant::isotropic);
  const SolveResult r = pdfp2o(p, 1.0, p.lambda_bound(), zero_state(p), StoppingRule{1e-14, 10000});
  EXPECT_LE((r.state.x - noisy.pixels).norm(), 1e-7);
}

TEST(ImageIo, PgmRoundTripAt16Bits)
{
  const Image img = shepp_logan(32);
  const auto path = std::filesystem::temp_directory_path() / "pdfp_io_test.pgm";
  write_pgm(img, path);
  const Image back = read_pgm(path);
  ASSERT_EQ(back.height, 32);
  ASSERT_EQ(back.width, 32);
  EXPECT_LE((back.pixels - img.pixels).cwiseAbs().maxCoeff(), 0.5 / 65535.0 + 1e-15);
  std::filesystem::remove(path);
}

TEST(ImageIo, CsvRoundTripIsExact)
{
  Image img = Image::zeros(3, 2);
  img.pixels << 0.1, 1.0 / 3.0, -2.5, 1e-17, 7.0, 0.0;
  const auto path = std::filesystem::temp_directory_path() / "pdfp_io_test.csv";
  write_image_csv(img, path);
  const Image back = read_image_csv(path);
  EXPECT_EQ(back.height, 3);
  EXPECT_EQ(back.width, 2);
  EXPECT_EQ(back.pixels, img.pixels);
  std::filesystem::remove(path);
}
