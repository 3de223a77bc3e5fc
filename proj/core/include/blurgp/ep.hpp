#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "blurgp/data.hpp"
#include "blurgp/likelihood.hpp"
#include "blurgp/posterior.hpp"

namespace blurgp {

/// Gaussian message from one data point. It constrains the projection
/// p^T g_B(f), where p = K_hat^{-1} K~(B, x_i), to N(g, 1/tau). Stored in
/// precision form so tau = 0 (no message yet) needs no reciprocal.
struct SiteParams {
  double g = 0.0;
  double tau = 0.0;
  Vector p;

  bool active() const noexcept { return tau != 0.0 || g != 0.0; }
};

struct EpConfig {
  /// Convergence threshold on max_i max(|dg_i|, |dtau_i|) over one sweep.
  double tol = 1e-6;
  int max_sweeps = 100;
  /// Weight of the new site in natural parameters; 1 means no damping.
  double damping = 1.0;
  bool shuffle = false;
  std::uint64_t seed = 0;
  double min_cavity_var = 1e-10;

  /// Regression: damping 1.0. Classification: damping 0.5.
  static EpConfig defaults_for(const Likelihood& lik);

  void validate() const;
};

struct EpDiagnostics {
  int sweeps = 0;
  bool converged = false;
  double max_delta = 0.0;
  std::vector<int> skipped_sites_per_sweep;
  long long total_updates = 0;

  long long skipped_total() const;
  std::string to_json() const;
};

/// p = K_hat^{-1} K~(B, x_i) through the cached Cholesky factor.
Vector compute_projection(const KhatGram& khat, const Vector& ktilde);

struct Deletion {
  PosteriorState cavity_state;
  CavityMarginal cavity;
  /// Set when the cavity variance falls to min_cavity_var or below, or the
  /// site cannot be removed; the caller skips this site for the sweep.
  bool collapsed = false;
};

/// Removes the site's message from the state. An inactive site deletes as the
/// identity. Otherwise, with h = p - beta K~(B, x_i) and s = K~(x_i, B) h,
///   alpha\i = alpha + h * tau / (1 - tau s) * (K~(x_i, B) alpha - g)
///   beta\i  = beta  - h h^T * tau / (1 - tau s).
/// The cavity marginal at x_i is read off the result.
Deletion delete_site(const PosteriorState& state, const SiteParams& site,
                     const Vector& ktilde, double min_cavity_var = 1e-10);

/// Convenience overload computing K~(B, x) from the input.
Deletion delete_site_at(const PosteriorState& state, const SiteParams& site,
                        const Vector& x, double min_cavity_var = 1e-10);

/// Moment-matching projection. With b = p - beta\i K~(B, x_i):
///   alpha = alpha\i + b dlogZ,  beta = beta\i - b b^T d2logZ.
PosteriorState project_site(const PosteriorState& cavity_state,
                            const Vector& p, const Vector& ktilde,
                            double dlogZ, double d2logZ);

struct Inclusion {
  SiteParams site;
  /// false when the damped site would leave the posterior with a collapsed
  /// cavity; the caller keeps the previous site and state.
  bool accepted = true;
  /// Derivatives that, fed to project_site on the cavity, multiply exactly the
  /// (damped) site into the cavity. Equal to the raw ones when damping = 1.
  double dlogZ = 0.0;
  double d2logZ = 0.0;
};

/// New site message from the tilted derivatives:
///   tau_new = -d2logZ / (1 + d2logZ K~(x_i, B) b)
///   g_new   = m\i(x_i) + dlogZ / (-d2logZ)
/// then blended with the old site in natural parameters (tau, tau g).
Inclusion include_site(const Deletion& deletion, const SiteParams& old_site,
                       const Vector& ktilde, const SiteDerivatives& derivs,
                       double damping = 1.0, double min_cavity_var = 1e-10);

/// Multiplies a stored message back into a cavity state.
PosteriorState include_message(const PosteriorState& cavity_state,
                               const SiteParams& site, const Vector& ktilde);

/// Everything an observer sees for one site update inside ep_fit.
struct SiteUpdateEvent {
  int sweep = 0;
  Eigen::Index index = 0;
  const Deletion* deletion = nullptr;
  SiteDerivatives derivs;
  const SiteParams* old_site = nullptr;
  const Inclusion* inclusion = nullptr;
  const PosteriorState* updated_state = nullptr;
  const Vector* ktilde = nullptr;
};

using EpObserver = std::function<void(const SiteUpdateEvent&)>;

struct EpResult {
  PosteriorState state;
  std::vector<SiteParams> sites;
  EpDiagnostics diagnostics;
};

/// Batch EP: start from alpha = 0, beta = 0 and all sites (0, 0), then
/// sweep deletion -> likelihood derivatives -> projection -> inclusion over
/// the data until no site parameter moves by tol or more. Hitting max_sweeps
/// is reported through diagnostics.converged, not thrown.
EpResult ep_fit(const Dataset& data, SparsePriorPtr prior,
                const Likelihood& lik, const EpConfig& cfg,
                const EpObserver& observer = {});

EpResult ep_fit(const Dataset& data, const RbfKernel& kernel,
                const BasisSet& basis, const Likelihood& lik,
                const EpConfig& cfg, const EpObserver& observer = {});

/// eps + (1 - 2 eps) Psi(m(x) / sqrt(1 + V(x, x))).
double predictive_class_probability(const PosteriorState& state,
                                    const Vector& x, const LabelNoise& lik);

}  // namespace blurgp
