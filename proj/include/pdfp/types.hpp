#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace pdfp {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Row-major 2-D image stored as a flat vector.
struct Image {
  Index height = 0;
  Index width = 0;
  Vec pixels;

  static Image zeros(Index height, Index width)
  {
    return Image{height, width, Vec::Zero(height * width)};
  }

  double &operator()(Index row, Index col) { return pixels[row * width + col]; }
  double operator()(Index row, Index col) const { return pixels[row * width + col]; }
  Index size() const { return height * width; }
};

/// The primal-dual iterate u = (v, x); v lives in the range of D.
struct PDState {
  Vec v;
  Vec x;
};

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The solver cannot handle the supplied problem structure (e.g. no
/// closed-form resolvent for a non-quadratic smooth term).
class UnsupportedProblem : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown by iterative estimators that hit their budget; carries the last estimate.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string &what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate)
  {
  }
  double best_estimate() const { return best_estimate_; }

private:
  double best_estimate_;
};

/// Independent random stream derived from one seed and a stream name.
/// Two different names never share a state sequence for the same seed.
inline std::mt19937_64 named_stream(std::uint64_t seed, std::string_view name)
{
  std::uint64_t h = 1469598103934665603ULL; // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

} // namespace pdfp
