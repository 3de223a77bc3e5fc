#pragma once

#include <variant>

namespace blurgp {

/// Marginal of the cavity process at the input of the site being updated.
struct CavityMarginal {
  double mean = 0.0;
  double var = 1.0;
};

/// p(y | f) = N(y | f, v_y).
struct GaussianNoise {
  double v_y = 0.1;
};

/// p(y | f) = (1 - eps) step(f y) + eps step(-f y). Matching against a
/// Gaussian cavity gives Z = eps + (1 - 2 eps) Psi(z), Psi the standard
/// normal cdf.
struct LabelNoise {
  double epsilon = 0.0;
};

using Likelihood = std::variant<GaussianNoise, LabelNoise>;

/// First and second derivative of log Z with respect to the cavity mean,
/// plus log Z itself.
struct SiteDerivatives {
  double dlogZ = 0.0;
  double d2logZ = 0.0;
  double logZ = 0.0;
};

void validate(const Likelihood& lik);
bool is_classification(const Likelihood& lik);

SiteDerivatives site_derivatives_regression(double y,
                                            const CavityMarginal& cavity,
                                            const GaussianNoise& lik);

/// y must be -1 or +1. gamma is evaluated as exp(log N(z) - log Z) so very
/// confident sites do not produce 0/0.
SiteDerivatives site_derivatives_classification(double y,
                                                const CavityMarginal& cavity,
                                                const LabelNoise& lik);

SiteDerivatives site_derivatives(double y, const CavityMarginal& cavity,
                                 const Likelihood& lik);

double std_normal_cdf(double z);

/// log Psi(z). Uses the asymptotic Mills-ratio series for z < -8.
double log_std_normal_cdf(double z);

double log_std_normal_pdf(double z);

}  // namespace blurgp
