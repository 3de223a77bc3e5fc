#include "blurgp/kernel.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "blurgp/error.hpp"

namespace blurgp {
namespace {

void check_dim(const Vector& v, int dim, const char* what) {
  if (v.size() != dim) {
    throw ShapeError(std::string(what) + ": expected dimension " +
                     std::to_string(dim) + ", got " +
                     std::to_string(v.size()));
  }
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// log of (2 pi sigma^2)^{d/2} N(r | 0, S) given the factor of S.
double log_scaled_gaussian(const Vector& r, const Eigen::LLT<Matrix>& s_llt,
                           double log_sigma2, double log_det_s) {
  const Vector w = s_llt.matrixL().solve(r);
  const auto d = static_cast<double>(r.size());
  return -0.5 * w.squaredNorm() + 0.5 * d * log_sigma2 - 0.5 * log_det_s;
}

Eigen::LLT<Matrix> factor_spd(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "blurred covariance plus sigma^2 I is not positive definite");
  }
  return llt;
}

Matrix shifted(const Matrix& c, double sigma2) {
  Matrix s = c;
  s.diagonal().array() += sigma2;
  return s;
}

}  // namespace

RbfKernel::RbfKernel(double sigma, int dim) : sigma_(sigma), dim_(dim) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidConfig("RBF length-scale must be positive and finite");
  }
  if (dim < 1) {
    throw InvalidConfig("RBF input dimension must be at least 1");
  }
}

double RbfKernel::operator()(const Vector& x, const Vector& xp) const {
  check_dim(x, dim_, "rbf_eval");
  check_dim(xp, dim_, "rbf_eval");
  return std::exp(-(x - xp).squaredNorm() / (2.0 * sigma_ * sigma_));
}

BasisSet::BasisSet(std::vector<BlurredBasis> bases) : bases_(std::move(bases)) {
  if (bases_.empty()) {
    throw InvalidConfig("basis set must contain at least one basis point");
  }
  const int d = bases_.front().dim();
  if (d < 1) {
    throw ShapeError("basis centers must have dimension >= 1");
  }
  for (std::size_t k = 0; k < bases_.size(); ++k) {
    const auto& b = bases_[k];
    const std::string tag = "basis " + std::to_string(k);
    if (b.dim() != d) {
      throw ShapeError(tag + ": center dimension differs from basis 0");
    }
    if (b.cov.rows() != d || b.cov.cols() != d) {
      throw ShapeError(tag + ": covariance must be d x d");
    }
    if (!b.center.allFinite() || !b.cov.allFinite()) {
      throw DataError(tag + ": non-finite center or covariance");
    }
    if (!(b.precision > 0.0)) {
      throw InvalidConfig(tag + ": virtual-target precision must be positive");
    }
    const double scale = std::max(1.0, b.cov.cwiseAbs().maxCoeff());
    if ((b.cov - b.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InvalidConfig(tag + ": covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(b.cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw InvalidConfig(tag + ": covariance is not positive semidefinite");
    }
  }
}

Matrix BasisSet::centers() const {
  Matrix out(static_cast<Eigen::Index>(size()), dim());
  for (std::size_t k = 0; k < size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = bases_[k].center.transpose();
  }
  return out;
}

double rbf_eval(const RbfKernel& kernel, const Vector& x, const Vector& xp) {
  return kernel(x, xp);
}

double blurred_cross(const RbfKernel& kernel, const Vector& x,
                     const BlurredBasis& basis) {
  check_dim(x, kernel.dim(), "blurred_cross");
  check_dim(basis.center, kernel.dim(), "blurred_cross basis");
  const double s2 = kernel.sigma() * kernel.sigma();
  const auto llt = factor_spd(shifted(basis.cov, s2));
  return std::exp(log_scaled_gaussian(x - basis.center, llt, std::log(s2),
                                      log_det(llt)));
}

Vector blurred_vector(const RbfKernel& kernel, const Vector& x,
                      const BasisSet& bases) {
  if (bases.dim() != kernel.dim()) {
    throw ShapeError("blurred_vector: basis and kernel dimensions differ");
  }
  Vector out(static_cast<Eigen::Index>(bases.size()));
  for (std::size_t j = 0; j < bases.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = blurred_cross(kernel, x, bases[j]);
  }
  return out;
}

double doubly_blurred(const RbfKernel& kernel, const BlurredBasis& bi,
                      const BlurredBasis& bj) {
  check_dim(bi.center, kernel.dim(), "doubly_blurred");
  check_dim(bj.center, kernel.dim(), "doubly_blurred");
  const double s2 = kernel.sigma() * kernel.sigma();
  const Matrix c = bi.cov + bj.cov;
  const auto llt = factor_spd(shifted(c, s2));
  const Vector r = bi.center - bj.center;
  return std::exp(log_scaled_gaussian(r, llt, std::log(s2), log_det(llt)));
}

BlurredFeatures::BlurredFeatures(const RbfKernel& kernel,
                                 const BasisSet& bases) {
  if (bases.dim() != kernel.dim()) {
    throw ShapeError("BlurredFeatures: basis and kernel dimensions differ");
  }
  const double s2 = kernel.sigma() * kernel.sigma();
  const double d = kernel.dim();
  centers_.reserve(bases.size());
  factors_.reserve(bases.size());
  log_scale_.reserve(bases.size());
  for (const auto& b : bases) {
    centers_.push_back(b.center);
    factors_.push_back(factor_spd(shifted(b.cov, s2)));
    log_scale_.push_back(0.5 * d * std::log(s2) -
                         0.5 * log_det(factors_.back()));
  }
}

Vector BlurredFeatures::operator()(const Vector& x) const {
  check_dim(x, static_cast<int>(centers_.front().size()), "BlurredFeatures");
  Vector out(static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) {
    const Vector w = factors_[j].matrixL().solve(x - centers_[j]);
    out[static_cast<Eigen::Index>(j)] =
        std::exp(-0.5 * w.squaredNorm() + log_scale_[j]);
  }
  return out;
}

Matrix BlurredFeatures::rows(const Matrix& inputs) const {
  Matrix out(inputs.rows(), static_cast<Eigen::Index>(size()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    out.row(i) = (*this)(inputs.row(i).transpose()).transpose();
  }
  return out;
}

namespace {

Matrix raw_khat(const RbfKernel& kernel, const BasisSet& bases) {
  if (bases.dim() != kernel.dim()) {
    throw ShapeError("gram_khat: basis and kernel dimensions differ");
  }
  const auto m = static_cast<Eigen::Index>(bases.size());
  Matrix k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = doubly_blurred(kernel, bases[static_cast<std::size_t>(i)],
                                      bases[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

bool try_factor(const Matrix& raw, double jitter, KhatGram& out) {
  out.matrix = raw;
  out.matrix.diagonal().array() += jitter * raw.diagonal().mean();
  out.factor.compute(out.matrix);
  out.jitter = jitter;
  out.attempted_jitters.push_back(jitter);
  return out.factor.info() == Eigen::Success;
}

}  // namespace

KhatGram gram_khat(const RbfKernel& kernel, const BasisSet& bases,
                   double jitter) {
  if (!(jitter >= 0.0)) {
    throw InvalidConfig("gram_khat: jitter must be non-negative");
  }
  const Matrix raw = raw_khat(kernel, bases);
  KhatGram out;
  double level = jitter;
  while (true) {
    if (try_factor(raw, level, out)) {
      return out;
    }
    const double next = level == 0.0 ? kDefaultJitter : level * 10.0;
    if (next > kMaxJitter * (1.0 + 1e-9)) {
      throw IllConditionedBasis(
          "doubly blurred Gram matrix is not positive definite after jitter "
          "escalation",
          out.attempted_jitters);
    }
    level = next;
  }
}

KhatGram gram_khat_fixed(const RbfKernel& kernel, const BasisSet& bases,
                         double jitter) {
  KhatGram out;
  if (!try_factor(raw_khat(kernel, bases), jitter, out)) {
    throw IllConditionedBasis(
        "doubly blurred Gram matrix is not positive definite at the stored "
        "jitter",
        out.attempted_jitters);
  }
  return out;
}

}  // namespace blurgp
