#include "blurgp/posterior.hpp"

#include <Eigen/Eigenvalues>

#include "blurgp/error.hpp"

namespace blurgp {

SparsePrior::SparsePrior(RbfKernel k, BasisSet b, double jitter)
    : kernel(k),
      basis(std::move(b)),
      features(kernel, basis),
      khat(gram_khat(kernel, basis, jitter)) {}

SparsePrior::SparsePrior(RbfKernel k, BasisSet b, KhatGram gram)
    : kernel(k),
      basis(std::move(b)),
      features(kernel, basis),
      khat(std::move(gram)) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  if (khat.matrix.rows() != m || khat.matrix.cols() != m) {
    throw ShapeError("K_hat size does not match the basis set");
  }
}

SparsePriorPtr make_sparse_prior(const RbfKernel& kernel, const BasisSet& basis,
                                 double jitter) {
  return std::make_shared<const SparsePrior>(kernel, basis, jitter);
}

PosteriorState prior_state(SparsePriorPtr prior) {
  const auto m = static_cast<Eigen::Index>(prior->size());
  return {std::move(prior), Vector::Zero(m), Matrix::Zero(m, m)};
}

PosteriorState prior_state(const RbfKernel& kernel, const BasisSet& basis) {
  return prior_state(make_sparse_prior(kernel, basis));
}

PosteriorState natural_from_virtual(SparsePriorPtr prior, const Vector& u,
                                    const Matrix& prior_cov) {
  const auto m = static_cast<Eigen::Index>(prior->size());
  if (u.size() != m || prior_cov.rows() != m || prior_cov.cols() != m) {
    throw ShapeError("natural_from_virtual: u and prior_cov must match M");
  }
  Matrix a = prior_cov;
  for (Eigen::Index k = 0; k < m; ++k) {
    a(k, k) += 1.0 / prior->basis[static_cast<std::size_t>(k)].precision;
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("V0_B + Lambda^{-1} is not positive definite");
  }
  Matrix beta = llt.solve(Matrix::Identity(m, m));
  symmetrize(beta);
  Vector alpha = beta * u;
  return {std::move(prior), std::move(alpha), std::move(beta)};
}

double predict_mean(const PosteriorState& state, const Vector& x) {
  return state.prior->features(x).dot(state.alpha);
}

double predict_cov(const PosteriorState& state, const Vector& x,
                   const Vector& xp) {
  const Vector kx = state.prior->features(x);
  const Vector kxp = state.prior->features(xp);
  // Average both evaluation orders; floating-point addition commutes, so the
  // result does not depend on argument order.
  const double q = 0.5 * (kx.dot(state.beta * kxp) + kxp.dot(state.beta * kx));
  return state.prior->kernel(x, xp) - q;
}

double predict_var(const PosteriorState& state, const Vector& x) {
  const Vector kx = state.prior->features(x);
  return 1.0 - kx.dot(state.beta * kx);
}

BasisMoments basis_moments(const PosteriorState& state) {
  const Matrix& k = state.prior->khat.matrix;
  BasisMoments out{k * state.alpha, k - k * state.beta * k};
  symmetrize(out.cov);
  return out;
}

void symmetrize(Matrix& m) {
  const Matrix t = m.transpose();
  m = 0.5 * (m + t);
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace blurgp
