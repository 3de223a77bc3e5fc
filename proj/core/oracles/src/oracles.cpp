#include "blurgp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "blurgp/error.hpp"

namespace blurgp::oracle {
namespace {

constexpr double kWhitenedRange = 10.0;  // N(t) < 1e-22 beyond |t| = 10

GaussRule golub_welsch(int n, bool hermite) {
  if (n < 1) throw InvalidConfig("quadrature needs at least one node");
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = hermite ? std::sqrt(k / 2.0)
                               : k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  const double mu0 = hermite ? std::sqrt(std::numbers::pi) : 2.0;
  GaussRule rule;
  for (int k = 0; k < n; ++k) {
    rule.nodes.push_back(eig.eigenvalues()[k]);
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights.push_back(mu0 * v0 * v0);
  }
  return rule;
}

const GaussRule& cached_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

double panel(const GaussRule& r, const std::function<double(double)>& f,
             double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    sum += r.weights[i] * f(mid + half * r.nodes[i]);
  }
  return sum * half;
}

double refine(const GaussRule& r, const std::function<double(double)>& f,
              double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = panel(r, f, a, m);
  const double right = panel(r, f, m, b);
  const double both = left + right;
  if (std::abs(both - whole) <= std::max(tol, 1e-15 * std::abs(both))) {
    return both;
  }
  if (depth <= 0) {
    throw OraclePrecisionError("adaptive quadrature did not reach tolerance");
  }
  return refine(r, f, a, m, left, 0.5 * tol, depth - 1) +
         refine(r, f, m, b, right, 0.5 * tol, depth - 1);
}

double std_normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

struct Whitening {
  Matrix a;       // x' = b + a t
  Vector t_peak;  // least-squares solution of a t = x - b
};

Whitening whiten(const Vector& x, const Vector& b, const Matrix& c) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  const auto d = c.rows();
  Whitening w{Matrix(d, d), Vector::Zero(d)};
  const Vector proj = eig.eigenvectors().transpose() * (x - b);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double lam = std::max(0.0, eig.eigenvalues()[k]);
    w.a.col(k) = eig.eigenvectors().col(k) * std::sqrt(lam);
    if (lam > 0.0) w.t_peak[k] = proj[k] / std::sqrt(lam);
  }
  return w;
}

std::vector<double> inside(std::initializer_list<double> pts) {
  std::vector<double> out;
  for (double p : pts) {
    if (std::isfinite(p) && p > -kWhitenedRange && p < kWhitenedRange) {
      out.push_back(p);
    }
  }
  return out;
}

double blurred_cross_once(double sigma, const Vector& x, const Vector& b,
                          const Matrix& c, int nodes, double tol) {
  const auto d = x.size();
  if (d < 1 || d > 2 || b.size() != d || c.rows() != d || c.cols() != d) {
    throw InvalidConfig("quadrature oracle supports d = 1 or 2 with matching shapes");
  }
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const Whitening w = whiten(x, b, c);
  const Vector r0 = x - b;
  const double lo = -kWhitenedRange;
  const double hi = kWhitenedRange;

  if (d == 1) {
    const double a = w.a(0, 0);
    auto f = [&](double t) {
      const double r = r0[0] - a * t;
      return std_normal_pdf(t) * std::exp(-r * r * inv2s2);
    };
    return adaptive_integrate_split(f, lo, hi, inside({w.t_peak[0]}), nodes,
                                    tol);
  }

  const Vector a1 = w.a.col(0);
  const Vector a2 = w.a.col(1);
  const double a2n = a2.squaredNorm();
  const double inner_tol = tol / (4.0 * kWhitenedRange);
  auto outer = [&](double t1) {
    const Vector r1 = r0 - a1 * t1;
    const double t2_peak = a2n > 0.0 ? a2.dot(r1) / a2n : 0.0;
    auto inner = [&](double t2) {
      const Vector r = r1 - a2 * t2;
      return std_normal_pdf(t2) * std::exp(-r.squaredNorm() * inv2s2);
    };
    return std_normal_pdf(t1) *
           adaptive_integrate_split(inner, lo, hi, inside({t2_peak}), nodes,
                                    inner_tol);
  };
  return adaptive_integrate_split(outer, lo, hi, inside({w.t_peak[0]}), nodes,
                                  tol);
}

double doubly_blurred_once(double sigma, const Vector& bi, const Matrix& ci,
                           const Vector& bj, const Matrix& cj, int nodes,
                           double tol) {
  const auto d = bi.size();
  if (d == 1) {
    const double sd = std::sqrt(std::max(0.0, ci(0, 0)));
    const double t_peak = sd > 0.0 ? (bj[0] - bi[0]) / sd : 0.0;
    const double inner_tol = tol / (4.0 * kWhitenedRange);
    auto outer = [&](double t) {
      const Vector x = bi + Vector::Constant(1, sd * t);
      return std_normal_pdf(t) *
             blurred_cross_once(sigma, x, bj, cj, nodes, inner_tol);
    };
    return adaptive_integrate_split(outer, -kWhitenedRange, kWhitenedRange,
                                    inside({t_peak}), nodes, tol);
  }
  // x - x' ~ N(bi - bj, ci + cj) and k depends on x - x' only.
  return blurred_cross_once(sigma, Vector::Zero(d), bi - bj, ci + cj, nodes,
                            tol);
}

template <typename F>
double dual_rule(const QuadratureRule& rule, F&& once, const char* what) {
  const double coarse = once(rule.nodes, 0.1 * rule.abs_tol);
  const double fine = once(2 * rule.nodes, 0.1 * rule.abs_tol);
  if (!(std::abs(coarse - fine) <= rule.abs_tol)) {
    throw OraclePrecisionError(std::string(what) +
                               ": dual-rule disagreement " +
                               std::to_string(std::abs(coarse - fine)));
  }
  return fine;
}

struct HalfLine {
  double log_scale = 0.0;  // integrals below are multiplied by exp(log_scale)
  double j0 = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;
};

// Moments int_0^inf t^k N(t | mu, v) dt, k = 0, 1, 2, returned with a common
// factor pulled out so deep tails do not underflow.
HalfLine half_line(double mu, double v, int nodes, double rel_tol) {
  HalfLine out;
  const double norm = -0.5 * std::log(2.0 * std::numbers::pi * v);
  std::function<double(double)> base;
  double upper = 0.0;
  std::vector<double> breaks;
  if (mu >= 0.0) {
    out.log_scale = norm;
    base = [=](double t) { return std::exp(-(t - mu) * (t - mu) / (2.0 * v)); };
    upper = mu + std::sqrt(80.0 * v);
    if (mu > 0.0) breaks.push_back(mu);
  } else {
    out.log_scale = norm - mu * mu / (2.0 * v);
    base = [=](double t) { return std::exp(mu * t / v - t * t / (2.0 * v)); };
    upper = std::min(40.0 * v / -mu, std::sqrt(80.0 * v));
  }
  auto moment = [&](int k) {
    auto f = [&](double t) { return base(t) * std::pow(t, k); };
    const double rough =
        adaptive_integrate_split(f, 0.0, upper, breaks, nodes, 1e-3 * upper);
    return adaptive_integrate_split(f, 0.0, upper, breaks, nodes,
                                    rel_tol * std::abs(rough) + 1e-300);
  };
  out.j0 = moment(0);
  out.j1 = moment(1);
  out.j2 = moment(2);
  return out;
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

TiltedMoments finish(double m, double v, double log_z, double mean,
                     double second) {
  TiltedMoments t;
  t.logZ = log_z;
  t.Z = std::exp(log_z);
  t.mean = mean;
  t.var = second - mean * mean;
  t.dlogZ = (t.mean - m) / v;
  t.d2logZ = (t.var - v) / (v * v);
  return t;
}

TiltedMoments tilted_step(double y, double m, double v, double eps, int nodes,
                          double tol) {
  if (y != 1.0 && y != -1.0) throw DataError("step likelihood needs y = +-1");
  // eps part: plain Gaussian moments, exact under Gauss-Hermite.
  const GaussRule gh = gauss_hermite(nodes);
  double e1 = 0.0;
  double e2 = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double f = m + std::sqrt(2.0 * v) * gh.nodes[i];
    const double w = gh.weights[i] / std::sqrt(std::numbers::pi);
    e1 += w * f;
    e2 += w * f * f;
  }
  // (1 - 2 eps) part on the half line f y > 0, with t = f y.
  const HalfLine h = half_line(m * y, v, nodes, tol);
  const double log_half = std::log1p(-2.0 * eps) + h.log_scale + std::log(h.j0);
  const double log_z = eps > 0.0 ? log_add(std::log(eps), log_half) : log_half;
  const double w_eps = eps > 0.0 ? std::exp(std::log(eps) - log_z) : 0.0;
  const double w_half = std::exp(std::log1p(-2.0 * eps) + h.log_scale - log_z);
  const double mean = w_eps * e1 + w_half * y * h.j1;
  const double second = w_eps * e2 + w_half * h.j2;
  return finish(m, v, log_z, mean, second);
}

TiltedMoments tilted_gaussian(double y, double m, double v, double v_y,
                              int nodes, double tol) {
  // Integrate around the peak of the integrand, in offsets from it.
  const double centre = (m * v_y + y * v) / (v + v_y);
  const double sd = std::sqrt(v * v_y / (v + v_y));
  const double half = 14.0 * sd;
  auto dens = [=](double u) {
    const double f = centre + u;
    const double ry = y - f;
    const double rm = f - m;
    return std::exp(-0.5 * ry * ry / v_y - 0.5 * rm * rm / v) /
           (2.0 * std::numbers::pi * std::sqrt(v * v_y));
  };
  const double peak = dens(0.0);
  auto scaled = [&](int k) {
    auto f = [&](double u) { return dens(u) / peak * std::pow(u, k); };
    return adaptive_integrate(f, -half, half, nodes,
                              tol * std::pow(sd, k + 1));
  };
  const double j0 = scaled(0);
  const double j1 = scaled(1);
  const double j2 = scaled(2);
  const double mu = j1 / j0;
  const double log_z = std::log(peak) + std::log(j0);
  return finish(m, v, log_z, centre + mu, (centre + mu) * (centre + mu) +
                                              (j2 / j0 - mu * mu));
}

TiltedMoments tilted_once(double y, const CavityMarginal& cav,
                          const Likelihood& lik, int nodes, double tol) {
  if (!(cav.var > 0.0)) throw InvalidConfig("cavity variance must be positive");
  if (const auto* g = std::get_if<GaussianNoise>(&lik)) {
    return tilted_gaussian(y, cav.mean, cav.var, g->v_y, nodes, tol);
  }
  return tilted_step(y, cav.mean, cav.var, std::get<LabelNoise>(lik).epsilon,
                     nodes, tol);
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace

GaussRule gauss_legendre(int n) { return golub_welsch(n, false); }

GaussRule gauss_hermite(int n) { return golub_welsch(n, true); }

double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, int nodes, double abs_tol, int max_depth) {
  if (!(b > a)) return 0.0;
  const GaussRule& r = cached_legendre(nodes);
  constexpr int kPanels = 8;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + p * width;
    const double hi = p + 1 == kPanels ? b : lo + width;
    total += refine(r, f, lo, hi, panel(r, f, lo, hi), abs_tol / kPanels,
                    max_depth);
  }
  return total;
}

double adaptive_integrate_split(const std::function<double(double)>& f,
                                double a, double b,
                                std::vector<double> breakpoints, int nodes,
                                double abs_tol) {
  std::vector<double> cuts{a};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double p : breakpoints) {
    if (p > cuts.back() && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  const double share = abs_tol / static_cast<double>(cuts.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive_integrate(f, cuts[i], cuts[i + 1], nodes, share);
  }
  return total;
}

double quad_blurred_cross(double sigma, const Vector& x, const Vector& b,
                          const Matrix& c, const QuadratureRule& rule) {
  return dual_rule(
      rule,
      [&](int n, double tol) {
        return blurred_cross_once(sigma, x, b, c, n, tol);
      },
      "quad_blurred_cross");
}

double quad_doubly_blurred(double sigma, const Vector& bi, const Matrix& ci,
                           const Vector& bj, const Matrix& cj,
                           const QuadratureRule& rule) {
  if (bi.size() != bj.size() || bi.size() < 1 || bi.size() > 2) {
    throw InvalidConfig("quadrature oracle supports d = 1 or 2");
  }
  return dual_rule(
      rule,
      [&](int n, double tol) {
        return doubly_blurred_once(sigma, bi, ci, bj, cj, n, tol);
      },
      "quad_doubly_blurred");
}

ExactGp exact_gp_regression(double sigma, const Matrix& train_x,
                            const Vector& train_y, double v_y,
                            const Matrix& query) {
  if (train_x.rows() != train_y.size() || train_x.cols() != query.cols()) {
    throw ShapeError("exact GP: inconsistent shapes");
  }
  if (!(v_y > 0.0)) throw InvalidConfig("exact GP needs v_y > 0");
  auto k = [&](const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        out(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() /
                             (2.0 * sigma * sigma));
      }
    }
    return out;
  };
  Matrix kxx = k(train_x, train_x);
  kxx.diagonal().array() += v_y;
  const Eigen::LLT<Matrix> llt(kxx);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("exact GP: K + v_y I is not positive definite");
  }
  const Matrix kxq = k(train_x, query);
  ExactGp out;
  out.mean = kxq.transpose() * llt.solve(train_y);
  const Matrix w = llt.matrixL().solve(kxq);
  out.var = (1.0 - w.colwise().squaredNorm().array()).matrix().transpose();
  return out;
}

TiltedMoments tilted_moments_quadrature(double y, const CavityMarginal& cavity,
                                        const Likelihood& lik,
                                        const QuadratureRule& rule) {
  const int n = rule.kind == RuleKind::GaussHermite ? rule.nodes
                                                     : std::max(rule.nodes, 16);
  const double rel = std::max(1e-14, 1e-3 * rule.abs_tol);
  const TiltedMoments a = tilted_once(y, cavity, lik, n, rel);
  const TiltedMoments b = tilted_once(y, cavity, lik, 2 * n, rel);
  if (!close(a.logZ, b.logZ, rule.abs_tol) ||
      !close(a.dlogZ, b.dlogZ, rule.abs_tol) ||
      !close(a.d2logZ, b.d2logZ, rule.abs_tol)) {
    throw OraclePrecisionError("tilted moments: dual-rule disagreement");
  }
  return b;
}

double probit_predictive_quadrature(double mean, double var, double epsilon,
                                    int nodes) {
  auto once = [&](int n) {
    const GaussRule gh = gauss_hermite(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      const double f = mean + std::sqrt(2.0 * std::max(0.0, var)) * gh.nodes[i];
      const double psi = 0.5 * std::erfc(-f / std::numbers::sqrt2);
      sum += gh.weights[i] * (epsilon + (1.0 - 2.0 * epsilon) * psi);
    }
    return sum / std::sqrt(std::numbers::pi);
  };
  const double coarse = once(nodes);
  const double fine = once(2 * nodes);
  if (!(std::abs(coarse - fine) <= 1e-9)) {
    throw OraclePrecisionError("probit predictive: dual-rule disagreement");
  }
  return fine;
}

FiniteDiff finite_diff(const std::function<double(double)>& f, double x,
                       double h) {
  if (!(h > 0.0)) throw InvalidConfig("finite-difference step must be positive");
  const double fp = f(x + h);
  const double f0 = f(x);
  const double fm = f(x - h);
  return {(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

}  // namespace blurgp::oracle
