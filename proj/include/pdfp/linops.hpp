#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "pdfp/types.hpp"

namespace pdfp {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Row-major sparse matrix; duplicate triplets are summed at construction.
class SparseMatrix {
public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

  SparseMatrix(Index rows, Index cols, std::span<const Triplet> triplets);
  explicit SparseMatrix(Storage m) : m_(std::move(m)) {}

  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  Index nnz() const { return m_.nonZeros(); }

  Vec multiply(const Vec &x) const;
  Vec multiply_transpose(const Vec &y) const;
  Mat to_dense() const { return Mat(m_); }
  const Storage &storage() const { return m_; }

private:
  Storage m_;
};

/// A linear map R^in -> R^out with its adjoint. Immutable after construction
/// and safe to apply concurrently.
class LinearOp {
public:
  using Apply = std::function<void(const Vec &in, Vec &out)>;
  enum class Kind { generic, identity, zero };

  LinearOp(Index in_dim, Index out_dim, Apply forward, Apply adjoint, Kind kind = Kind::generic,
           std::string name = "linear");

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  Kind kind() const { return kind_; }
  const std::string &name() const { return name_; }

  Vec forward(const Vec &x) const;
  Vec adjoint(const Vec &v) const;
  void forward(const Vec &x, Vec &out) const;
  void adjoint(const Vec &v, Vec &out) const;

private:
  Index in_dim_;
  Index out_dim_;
  Apply forward_;
  Apply adjoint_;
  Kind kind_;
  std::string name_;
};

enum class TvVariant { anisotropic, isotropic };

LinearOp identity_op(Index n);
LinearOp zero_op(Index in_dim, Index out_dim);
LinearOp matrix_op(SparseMatrix m);
LinearOp dense_op(Mat m);

/// Forward differences of an h x w row-major image. Output is the h*w
/// horizontal differences followed by the h*w vertical differences; the last
/// column (resp. row) of each block is zero (Neumann boundary).
LinearOp diff_op_2d(Index height, Index width);

/// Separable normalized Gaussian blur with half-sample symmetric boundary
/// extension. The resulting matrix is symmetric.
LinearOp gaussian_blur_op(Index height, Index width, int radius, double sigma);

/// Normalized 1-D Gaussian weights w[k + radius] for k in [-radius, radius].
std::vector<double> gaussian_kernel_1d(int radius, double sigma);

struct PowerIterationOptions {
  double tol = 1e-6;
  int max_iter = 20000;
  std::uint64_t seed = 0;
};

using SymmetricApply = std::function<void(const Vec &in, Vec &out)>;

/// Largest eigenvalue of a symmetric positive semi-definite operator on R^n.
double max_eigenvalue(const SymmetricApply &apply, Index n, const PowerIterationOptions &opts = {});

/// lambda_max(D D^T), computed on whichever of D^T D, D D^T is smaller.
/// Returns 0 for the zero operator.
double op_norm_sq(const LinearOp &D, const PowerIterationOptions &opts = {});

struct CgResult {
  Vec x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Conjugate gradients for a symmetric positive definite operator.
CgResult conjugate_gradient(const SymmetricApply &apply, const Vec &rhs, const Vec &x0, double tol,
                            int max_iter);

/// Smallest eigenvalue of a symmetric positive definite operator by inverse
/// power iteration (inner solves by conjugate gradients). Throws
/// InvariantViolation when the operator looks singular.
double min_eigenvalue_spd(const SymmetricApply &apply, Index n,
                          const PowerIterationOptions &opts = {});

} // namespace pdfp
