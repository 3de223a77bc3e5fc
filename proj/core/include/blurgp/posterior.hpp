#pragma once

#include <memory>

#include "blurgp/kernel.hpp"

namespace blurgp {

/// Everything about the sparse prior that stays fixed during a fit: the
/// kernel, the blurred bases, the cached per-basis factors and K_hat.
/// Immutable once built, so it is shared between states.
struct SparsePrior {
  SparsePrior(RbfKernel kernel, BasisSet basis, double jitter = kDefaultJitter);
  SparsePrior(RbfKernel kernel, BasisSet basis, KhatGram khat);

  RbfKernel kernel;
  BasisSet basis;
  BlurredFeatures features;
  KhatGram khat;

  std::size_t size() const noexcept { return basis.size(); }
};

using SparsePriorPtr = std::shared_ptr<const SparsePrior>;

SparsePriorPtr make_sparse_prior(const RbfKernel& kernel, const BasisSet& basis,
                                 double jitter = kDefaultJitter);

/// Posterior process in (alpha, beta) form:
///   m(x)     = K~(x, B) alpha
///   V(x, x') = k(x, x') - K~(x, B) beta K~(B, x')
struct PosteriorState {
  SparsePriorPtr prior;
  Vector alpha;
  Matrix beta;

  std::size_t size() const noexcept { return prior->size(); }
};

/// Mean and covariance of the projected coordinates g_B(f).
struct BasisMoments {
  Vector mean;
  Matrix cov;
};

/// alpha = 0, beta = 0: the zero-mean prior.
PosteriorState prior_state(SparsePriorPtr prior);
PosteriorState prior_state(const RbfKernel& kernel, const BasisSet& basis);

/// State defined by the virtual observations (u, Lambda) of the bases:
///   beta = (V0_B + Lambda^{-1})^{-1},  alpha = beta u,
/// with lambda_k read from the bases. `prior_cov` is V0_B, which is K_hat for
/// a zero prior mean.
PosteriorState natural_from_virtual(SparsePriorPtr prior, const Vector& u,
                                    const Matrix& prior_cov);

double predict_mean(const PosteriorState& state, const Vector& x);

/// Symmetric in (x, xp) to the last bit.
double predict_cov(const PosteriorState& state, const Vector& x,
                   const Vector& xp);

/// Latent variance V(x, x).
double predict_var(const PosteriorState& state, const Vector& x);

/// mean = K_hat alpha, cov = K_hat - K_hat beta K_hat (symmetrized).
BasisMoments basis_moments(const PosteriorState& state);

void symmetrize(Matrix& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

}  // namespace blurgp
