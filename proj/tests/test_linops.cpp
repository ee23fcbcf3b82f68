#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "fixtures.hpp"

using namespace pdfp;
using pdfp::testing::random_vec;

namespace {

Mat dense_of(const LinearOp &op)
{
  Mat m(op.out_dim(), op.in_dim());
  Vec e = Vec::Zero(op.in_dim());
  for (Index j = 0; j < op.in_dim(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.forward(e);
    e[j] = 0.0;
  }
  return m;
}

Mat dense_adjoint_of(const LinearOp &op)
{
  Mat m(op.in_dim(), op.out_dim());
  Vec e = Vec::Zero(op.out_dim());
  for (Index j = 0; j < op.out_dim(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.adjoint(e);
    e[j] = 0.0;
  }
  return m;
}

double dense_lambda_max(const Mat &m)
{
  return Eigen::SelfAdjointEigenSolver<Mat>(m * m.transpose()).eigenvalues().maxCoeff();
}

} // namespace

TEST(SparseMatrix, SumsDuplicateTriplets)
{
  const std::vector<Triplet> t = {{0, 0, 1.0}, {0, 0, 2.0}, {1, 2, -1.0}};
  SparseMatrix m(2, 3, t);
  EXPECT_EQ(m.nnz(), 2);
  EXPECT_DOUBLE_EQ(m.to_dense()(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(m.to_dense()(1, 2), -1.0);
}

TEST(SparseMatrix, RejectsOutOfRangeTriplet)
{
  const std::vector<Triplet> t = {{2, 0, 1.0}};
  EXPECT_THROW(SparseMatrix(2, 3, t), InvalidArgument);
}

TEST(SparseMatrix, MultiplyMatchesDense)
{
  auto rng = named_stream(1, "sparse");
  std::vector<Triplet> t;
  std::uniform_int_distribution<Index> row(0, 6), col(0, 4);
  for (int k = 0; k < 20; ++k) { t.push_back({row(rng), col(rng), std::normal_distribution<double>()(rng)}); }
  SparseMatrix m(7, 5, t);
  const Vec x = random_vec(rng, 5);
  const Vec y = random_vec(rng, 7);
  EXPECT_LE((m.multiply(x) - m.to_dense() * x).norm(), 1e-12);
  EXPECT_LE((m.multiply_transpose(y) - m.to_dense().transpose() * y).norm(), 1e-12);
}

TEST(LinearOp, DimensionMismatchThrows)
{
  const LinearOp I = identity_op(3);
  EXPECT_THROW(I.forward(Vec::Zero(4)), InvalidArgument);
  EXPECT_THROW(I.adjoint(Vec::Zero(2)), InvalidArgument);
}

TEST(LinearOp, ZeroOperator)
{
  const LinearOp Z = zero_op(3, 5);
  EXPECT_EQ(Z.forward(Vec::Ones(3)).size(), 5);
  EXPECT_EQ(Z.forward(Vec::Ones(3)).norm(), 0.0);
  EXPECT_EQ(op_norm_sq(Z), 0.0);
}

TEST(DiffOp, AdjointMatchesDenseTranspose)
{
  for (auto [h, w] : {std::pair<Index, Index>{2, 2}, {3, 5}, {6, 4}}) {
    const LinearOp D = diff_op_2d(h, w);
    EXPECT_EQ(D.out_dim(), 2 * h * w);
    EXPECT_LE((dense_adjoint_of(D) - dense_of(D).transpose()).norm(), 1e-14);
  }
}

TEST(DiffOp, ForwardDifferencesWithNeumannBoundary)
{
  // 2x3 image [[1 2 4] [0 0 7]]
  Vec x(6);
  x << 1, 2, 4, 0, 0, 7;
  const Vec d = diff_op_2d(2, 3).forward(x);
  Vec expected(12);
  expected << 1, 2, 0, 0, 7, 0, // horizontal
      -1, -2, 3, 0, 0, 0;       // vertical
  EXPECT_EQ(d, expected);
}

TEST(DiffOp, RejectsDegenerateShape)
{
  EXPECT_THROW(diff_op_2d(1, 4), InvalidArgument);
}

TEST(DiffOp, SpectralBoundOn4x4MatchesDenseEigensolver)
{
  const LinearOp D = diff_op_2d(4, 4);
  const double dense = dense_lambda_max(dense_of(D));
  EXPECT_NEAR(dense, 4.0 + 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(op_norm_sq(D, PowerIterationOptions{1e-10, 100000, 0}), dense, 1e-6 * dense);
}

TEST(DiffOp, SpectralBoundStaysBelowEight)
{
  for (Index n : {8, 16, 32}) { EXPECT_LT(op_norm_sq(diff_op_2d(n, n)), 8.0); }
}

TEST(PowerIteration, MatchesDenseEigenvaluesOnRandomMatrices)
{
  auto rng = named_stream(11, "power");
  for (int trial = 0; trial < 5; ++trial) {
    Mat m(9, 6);
    for (Index i = 0; i < m.size(); ++i) { m.data()[i] = std::normal_distribution<double>()(rng); }
    const LinearOp A = dense_op(m);
    const double dense = dense_lambda_max(m);
    EXPECT_NEAR(op_norm_sq(A, PowerIterationOptions{1e-10, 200000, 0}), dense, 1e-6 * dense);
  }
}

TEST(PowerIteration, IdentityIsOne)
{
  EXPECT_EQ(op_norm_sq(identity_op(7)), 1.0);
}

TEST(PowerIteration, BudgetExhaustionCarriesEstimate)
{
  // Two nearly equal top eigenvalues converge slowly.
  Vec d(2);
  d << 1.0, 0.999999;
  const Mat m = d.asDiagonal();
  try {
    max_eigenvalue([&](const Vec &x, Vec &y) { y = m * x; }, 2, PowerIterationOptions{1e-15, 3, 0});
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence &e) {
    EXPECT_GT(e.best_estimate(), 0.99);
  }
}

TEST(MinEigenvalue, MatchesDenseEigensolver)
{
  auto rng = named_stream(2, "mineig");
  Mat m(6, 6);
  for (Index i = 0; i < m.size(); ++i) { m.data()[i] = std::normal_distribution<double>()(rng); }
  const Mat spd = m * m.transpose() + 0.5 * Mat::Identity(6, 6);
  const double dense = Eigen::SelfAdjointEigenSolver<Mat>(spd).eigenvalues().minCoeff();
  const double est = min_eigenvalue_spd([&](const Vec &x, Vec &y) { y = spd * x; }, 6,
                                        PowerIterationOptions{1e-10, 100000, 0});
  EXPECT_NEAR(est, dense, 1e-6 * dense);
}

TEST(ConjugateGradient, SolvesSpdSystem)
{
  auto rng = named_stream(4, "cg");
  Mat m(10, 10);
  for (Index i = 0; i < m.size(); ++i) { m.data()[i] = std::normal_distribution<double>()(rng); }
  const Mat spd = m * m.transpose() + Mat::Identity(10, 10);
  const Vec rhs = random_vec(rng, 10);
  auto res = conjugate_gradient([&](const Vec &x, Vec &y) { y = spd * x; }, rhs, Vec::Zero(10), 1e-12, 100);
  EXPECT_TRUE(res.converged);
  EXPECT_LE((spd * res.x - rhs).norm(), 1e-10 * rhs.norm());
}

TEST(GaussianBlur, KernelIsNormalizedAndSymmetric)
{
  const auto k = gaussian_kernel_1d(2, 1.3);
  ASSERT_EQ(k.size(), 5u);
  double sum = 0.0;
  for (double w : k) { sum += w; }
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(k[0], k[4]);
  EXPECT_DOUBLE_EQ(k[1], k[3]);
}

TEST(GaussianBlur, OperatorIsSelfAdjointAndPreservesConstants)
{
  for (int radius : {1, 2, 3}) {
    const LinearOp K = gaussian_blur_op(5, 7, radius, 1.0);
    const Mat m = dense_of(K);
    EXPECT_LE((m - m.transpose()).norm(), 1e-14) << "radius " << radius;
    EXPECT_LE((dense_adjoint_of(K) - m.transpose()).norm(), 1e-14);
    EXPECT_LE((K.forward(Vec::Ones(35)) - Vec::Ones(35)).norm(), 1e-13);
    EXPECT_LE(op_norm_sq(K), 1.0 + 1e-9);
  }
}

TEST(GaussianBlur, RejectsOversizedRadius)
{
  EXPECT_THROW(gaussian_blur_op(3, 3, 4, 1.0), InvalidArgument);
}
