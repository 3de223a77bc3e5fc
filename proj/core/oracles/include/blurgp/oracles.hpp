#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "blurgp/likelihood.hpp"

// Brute-force references for tests, the acceptance suite and the `oracle`
// CLI command. Nothing here calls into the closed forms it checks; the
// library links against Eigen only.
namespace blurgp::oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class RuleKind { Adaptive1D, Tensor2D, GaussHermite };

struct QuadratureRule {
  RuleKind kind = RuleKind::Adaptive1D;
  /// Gauss points per panel (adaptive) or total nodes (Gauss-Hermite).
  int nodes = 16;
  /// Absolute tolerance. Results are accepted only when the rule and a
  /// second rule with doubled nodes agree to within this value.
  double abs_tol = 1e-10;
};

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights on [-1, 1] (Golub-Welsch).
GaussRule gauss_legendre(int n);

/// Nodes and weights for the weight function exp(-x^2) (Golub-Welsch).
GaussRule gauss_hermite(int n);

/// Adaptive bisection with an n-point Gauss-Legendre panel rule. Throws
/// OraclePrecisionError if the tolerance is not met within max_depth halvings.
double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, int nodes, double abs_tol,
                          int max_depth = 48);

/// Splits [a, b] at the given interior points and integrates each piece.
double adaptive_integrate_split(const std::function<double(double)>& f,
                                double a, double b,
                                std::vector<double> breakpoints, int nodes,
                                double abs_tol);

/// int exp(-|x - x'|^2 / (2 sigma^2)) N(x' | b, c) dx' for d <= 2, by
/// whitening x' = b + U sqrt(L) t and nested adaptive quadrature in t.
double quad_blurred_cross(double sigma, const Vector& x, const Vector& b,
                          const Matrix& c, const QuadratureRule& rule = {});

/// int int N(x | bi, ci) k(x, x') N(x' | bj, cj) dx dx'. For d = 1 this is a
/// nested 2-D quadrature. For d = 2 it integrates the kernel against the
/// distribution of x - x' ~ N(bi - bj, ci + cj), which is again a 2-D
/// quadrature.
double quad_doubly_blurred(double sigma, const Vector& bi, const Matrix& ci,
                           const Vector& bj, const Matrix& cj,
                           const QuadratureRule& rule = {});

struct ExactGp {
  Vector mean;
  Vector var;  // latent variance
};

/// Dense GP regression: mean = k*^T (K + v_y I)^{-1} y,
/// var = k** - k*^T (K + v_y I)^{-1} k*, with the RBF kernel.
ExactGp exact_gp_regression(double sigma, const Matrix& train_x,
                            const Vector& train_y, double v_y,
                            const Matrix& query);

struct TiltedMoments {
  double Z = 0.0;
  double logZ = 0.0;
  double mean = 0.0;
  double var = 0.0;
  /// (E[f] - m) / v and (Var[f] - v) / v^2.
  double dlogZ = 0.0;
  double d2logZ = 0.0;
};

/// Moments of p(y | f) N(f | m, v) by quadrature. The step likelihood is
/// integrated piecewise, split at f = 0: the constant eps part with
/// Gauss-Hermite, the half line with adaptive Gauss-Legendre. The Gaussian
/// likelihood is integrated adaptively around its peak.
TiltedMoments tilted_moments_quadrature(double y, const CavityMarginal& cavity,
                                        const Likelihood& lik,
                                        const QuadratureRule& rule = {});

/// int (eps + (1 - 2 eps) Psi(f)) N(f | m, v) df with Gauss-Hermite nodes.
double probit_predictive_quadrature(double mean, double var, double epsilon,
                                    int nodes = 64);

struct FiniteDiff {
  double first = 0.0;
  double second = 0.0;
};

/// Centered first and second differences with step h.
FiniteDiff finite_diff(const std::function<double(double)>& f, double x,
                       double h);

}  // namespace blurgp::oracle
