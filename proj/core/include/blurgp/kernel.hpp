#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace blurgp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative diagonal jitter used before the first factorization attempt of
/// the doubly blurred Gram matrix.
inline constexpr double kDefaultJitter = 1e-10;
/// Largest relative jitter tried before giving up.
inline constexpr double kMaxJitter = 1e-6;

/// Isotropic squared-exponential kernel
///   k(x, x') = exp(-|x - x'|^2 / (2 sigma^2)).
class RbfKernel {
 public:
  RbfKernel(double sigma, int dim);

  double sigma() const noexcept { return sigma_; }
  int dim() const noexcept { return dim_; }

  double operator()(const Vector& x, const Vector& xp) const;

 private:
  double sigma_;
  int dim_;
};

/// A basis point b_k blurred by N(x | b_k, c_k), together with the virtual
/// observation (u_k, lambda_k) attached to it.
struct BlurredBasis {
  Vector center;
  Matrix cov;
  double precision = 1e6;
  double virtual_target = 0.0;

  int dim() const noexcept { return static_cast<int>(center.size()); }
};

/// Ordered, non-empty collection of blurred bases sharing one input
/// dimension. Indices are identities: the order never changes.
class BasisSet {
 public:
  explicit BasisSet(std::vector<BlurredBasis> bases);

  std::size_t size() const noexcept { return bases_.size(); }
  int dim() const noexcept { return bases_.front().dim(); }

  const BlurredBasis& operator[](std::size_t k) const { return bases_[k]; }
  auto begin() const noexcept { return bases_.cbegin(); }
  auto end() const noexcept { return bases_.cend(); }

  /// Centers stacked as rows (M x d).
  Matrix centers() const;

 private:
  std::vector<BlurredBasis> bases_;
};

double rbf_eval(const RbfKernel& kernel, const Vector& x, const Vector& xp);

/// Closed form of  int k(x, x') N(x' | b, c) dx'
///   = (2 pi sigma^2)^{d/2} N(x | b, c + sigma^2 I).
/// The normalization exponent is half the input dimension.
double blurred_cross(const RbfKernel& kernel, const Vector& x,
                     const BlurredBasis& basis);

/// Row vector [blurred_cross(x, b_1), ..., blurred_cross(x, b_M)].
Vector blurred_vector(const RbfKernel& kernel, const Vector& x,
                      const BasisSet& bases);

/// Closed form of  int int N(x | b_i, c_i) k(x, x') N(x' | b_j, c_j) dx dx'
///   = (2 pi sigma^2)^{d/2} N(b_i | b_j, c_i + c_j + sigma^2 I).
double doubly_blurred(const RbfKernel& kernel, const BlurredBasis& bi,
                      const BlurredBasis& bj);

/// Per-basis cache of the factors of c_k + sigma^2 I, so that evaluating the
/// blurred cross-covariance at many inputs costs O(M d^2) per input.
class BlurredFeatures {
 public:
  BlurredFeatures(const RbfKernel& kernel, const BasisSet& bases);

  std::size_t size() const noexcept { return centers_.size(); }

  /// Same values as blurred_vector(kernel, x, bases).
  Vector operator()(const Vector& x) const;

  /// One row per input row (N x M).
  Matrix rows(const Matrix& inputs) const;

 private:
  std::vector<Vector> centers_;
  std::vector<Eigen::LLT<Matrix>> factors_;
  std::vector<double> log_scale_;
};

/// The doubly blurred Gram matrix with its Cholesky factor. `matrix` already
/// contains the jitter that made the factorization succeed.
struct KhatGram {
  Matrix matrix;
  Eigen::LLT<Matrix> factor;
  /// Relative jitter actually applied (times the mean diagonal).
  double jitter = 0.0;
  std::vector<double> attempted_jitters;

  Vector solve(const Vector& rhs) const { return factor.solve(rhs); }
  Matrix solve(const Matrix& rhs) const { return factor.solve(rhs); }
};

/// Builds K_hat with entries doubly_blurred(b_i, b_j), adds
/// jitter * mean(diag) to the diagonal and factorizes. On failure the jitter
/// is raised tenfold up to kMaxJitter; past that IllConditionedBasis is
/// thrown carrying every level tried.
KhatGram gram_khat(const RbfKernel& kernel, const BasisSet& bases,
                   double jitter = kDefaultJitter);

/// Builds K_hat at exactly one jitter level, no escalation.
KhatGram gram_khat_fixed(const RbfKernel& kernel, const BasisSet& bases,
                         double jitter);

}  // namespace blurgp
