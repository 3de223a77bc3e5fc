#include "blurgp/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "blurgp/error.hpp"

namespace blurgp {
namespace {

constexpr double kTailSwitch = -8.0;

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double log_std_normal_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_std_normal_cdf(double z) {
  if (z >= kTailSwitch) {
    if (z > 0.0) {
      return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
    }
    return std::log(std_normal_cdf(z));
  }
  // Psi(z) = N(z)/|z| * (1 - 1/z^2 + 3/z^4 - 15/z^6 + ...). Terms shrink until
  // n ~ z^2/2, so stop at the smallest one.
  const double inv_z2 = 1.0 / (z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    const double next = -term * (2.0 * n - 1.0) * inv_z2;
    if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-17) {
      break;
    }
    term = next;
    sum += term;
  }
  return log_std_normal_pdf(z) - std::log(-z) + std::log(sum);
}

void validate(const Likelihood& lik) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (!(l.v_y > 0.0) || !std::isfinite(l.v_y)) {
            throw InvalidConfig("observation noise v_y must be positive");
          }
        } else {
          if (!(l.epsilon >= 0.0 && l.epsilon < 0.5)) {
            throw InvalidConfig("label-noise epsilon must lie in [0, 0.5)");
          }
        }
      },
      lik);
}

bool is_classification(const Likelihood& lik) {
  return std::holds_alternative<LabelNoise>(lik);
}

SiteDerivatives site_derivatives_regression(double y,
                                            const CavityMarginal& cavity,
                                            const GaussianNoise& lik) {
  const double s = lik.v_y + cavity.var;
  const double r = y - cavity.mean;
  return {r / s, -1.0 / s,
          -0.5 * std::log(2.0 * std::numbers::pi * s) - 0.5 * r * r / s};
}

SiteDerivatives site_derivatives_classification(double y,
                                                const CavityMarginal& cavity,
                                                const LabelNoise& lik) {
  if (y != 1.0 && y != -1.0) {
    throw DataError("classification targets must be -1 or +1, got " +
                    std::to_string(y));
  }
  if (!(cavity.var > 0.0)) {
    throw NumericalError("classification site needs a positive cavity variance");
  }
  const double eps = lik.epsilon;
  const double sd = std::sqrt(cavity.var);
  const double z = cavity.mean * y / sd;
  const double log_scale = std::log1p(-2.0 * eps);
  const double log_psi = log_std_normal_cdf(z);
  const double log_z =
      eps > 0.0 ? log_add(std::log(eps), log_scale + log_psi) : log_psi;
  if (!std::isfinite(log_z)) {
    throw NumericalError("tilted normalizer Z is not positive");
  }
  const double gamma =
      std::exp(log_scale + log_std_normal_pdf(z) - log_z - std::log(sd));
  const double d1 = gamma * y;
  const double d2 = -gamma * (cavity.mean * y + cavity.var * gamma) / cavity.var;
  return {d1, d2, log_z};
}

SiteDerivatives site_derivatives(double y, const CavityMarginal& cavity,
                                 const Likelihood& lik) {
  return std::visit(
      [&](const auto& l) -> SiteDerivatives {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          return site_derivatives_regression(y, cavity, l);
        } else {
          return site_derivatives_classification(y, cavity, l);
        }
      },
      lik);
}

}  // namespace blurgp
