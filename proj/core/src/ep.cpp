#include "blurgp/ep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "blurgp/error.hpp"

namespace blurgp {

EpConfig EpConfig::defaults_for(const Likelihood& lik) {
  EpConfig cfg;
  cfg.damping = is_classification(lik) ? 0.5 : 1.0;
  return cfg;
}

void EpConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidConfig("EP tolerance must be positive");
  if (max_sweeps < 1) throw InvalidConfig("EP max_sweeps must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw InvalidConfig("EP damping must lie in (0, 1]");
  }
  if (!(min_cavity_var > 0.0)) {
    throw InvalidConfig("EP min_cavity_var must be positive");
  }
}

long long EpDiagnostics::skipped_total() const {
  return std::accumulate(skipped_sites_per_sweep.begin(),
                         skipped_sites_per_sweep.end(), 0LL);
}

std::string EpDiagnostics::to_json() const {
  nlohmann::json j;
  j["sweeps"] = sweeps;
  j["converged"] = converged;
  j["max_delta"] = max_delta;
  j["skipped_sites_per_sweep"] = skipped_sites_per_sweep;
  j["total_updates"] = total_updates;
  j["skipped_total"] = skipped_total();
  return j.dump(2);
}

Vector compute_projection(const KhatGram& khat, const Vector& ktilde) {
  if (ktilde.size() != khat.matrix.rows()) {
    throw ShapeError("compute_projection: K~(B, x) has the wrong length");
  }
  return khat.solve(ktilde);
}

namespace {

CavityMarginal marginal_at(const PosteriorState& s, const Vector& ktilde) {
  return {ktilde.dot(s.alpha), 1.0 - ktilde.dot(s.beta * ktilde)};
}

void check_site_shapes(const PosteriorState& state, const Vector& p,
                       const Vector& ktilde) {
  const auto m = static_cast<Eigen::Index>(state.size());
  if (p.size() != m || ktilde.size() != m) {
    throw ShapeError("site projection and K~(B, x) must have length M");
  }
}

}  // namespace

Deletion delete_site(const PosteriorState& state, const SiteParams& site,
                     const Vector& ktilde, double min_cavity_var) {
  if (!site.active()) {
    if (ktilde.size() != static_cast<Eigen::Index>(state.size())) {
      throw ShapeError("K~(B, x) must have length M");
    }
    Deletion out{state, marginal_at(state, ktilde), false};
    out.collapsed = !(out.cavity.var > min_cavity_var);
    return out;
  }
  check_site_shapes(state, site.p, ktilde);
  const Vector h = site.p - state.beta * ktilde;
  const double s = ktilde.dot(h);
  const double denom = 1.0 - site.tau * s;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    return {state, marginal_at(state, ktilde), true};
  }
  const double coef = site.tau / denom;
  PosteriorState cavity = state;
  cavity.alpha += h * (coef * (ktilde.dot(state.alpha) - site.g));
  cavity.beta -= coef * (h * h.transpose());
  symmetrize(cavity.beta);
  Deletion out{std::move(cavity), {}, false};
  out.cavity = marginal_at(out.cavity_state, ktilde);
  out.collapsed = !(out.cavity.var > min_cavity_var);
  return out;
}

Deletion delete_site_at(const PosteriorState& state, const SiteParams& site,
                        const Vector& x, double min_cavity_var) {
  return delete_site(state, site, state.prior->features(x), min_cavity_var);
}

PosteriorState project_site(const PosteriorState& cavity_state,
                            const Vector& p, const Vector& ktilde,
                            double dlogZ, double d2logZ) {
  check_site_shapes(cavity_state, p, ktilde);
  const Vector b = p - cavity_state.beta * ktilde;
  PosteriorState out = cavity_state;
  out.alpha += b * dlogZ;
  out.beta -= d2logZ * (b * b.transpose());
  symmetrize(out.beta);
  return out;
}

Inclusion include_site(const Deletion& deletion, const SiteParams& old_site,
                       const Vector& ktilde, const SiteDerivatives& derivs,
                       double damping, double min_cavity_var) {
  const PosteriorState& cav = deletion.cavity_state;
  check_site_shapes(cav, old_site.p, ktilde);
  const double m = deletion.cavity.mean;
  const double s = ktilde.dot(old_site.p - cav.beta * ktilde);
  const double d1 = derivs.dlogZ;
  const double d2 = derivs.d2logZ;

  Inclusion out;
  out.site.p = old_site.p;

  double tau_new = 0.0;
  double g_new = 0.0;
  if (d2 != 0.0) {
    const double denom = 1.0 + d2 * s;
    if (!(denom > 0.0)) {
      out.accepted = false;
      out.site = old_site;
      return out;
    }
    tau_new = -d2 / denom;
    g_new = m + d1 / (-d2);
  }

  double tau = tau_new;
  double g = g_new;
  if (damping != 1.0) {
    tau = (1.0 - damping) * old_site.tau + damping * tau_new;
    const double nu = (1.0 - damping) * old_site.tau * old_site.g +
                      damping * tau_new * g_new;
    g = tau != 0.0 ? nu / tau : 0.0;
  }
  if (tau == 0.0) g = 0.0;

  const double spread = 1.0 + tau * s;
  if (!std::isfinite(tau) || !std::isfinite(g) || !(spread > min_cavity_var)) {
    out.accepted = false;
    out.site = old_site;
    return out;
  }
  out.site.tau = tau;
  out.site.g = g;
  if (damping == 1.0) {
    out.dlogZ = d1;
    out.d2logZ = d2;
  } else {
    out.d2logZ = -tau / spread;
    out.dlogZ = tau * (g - m) / spread;
  }
  return out;
}

PosteriorState include_message(const PosteriorState& cavity_state,
                               const SiteParams& site, const Vector& ktilde) {
  check_site_shapes(cavity_state, site.p, ktilde);
  if (!site.active()) return cavity_state;
  const double s = ktilde.dot(site.p - cavity_state.beta * ktilde);
  const double m = ktilde.dot(cavity_state.alpha);
  const double spread = 1.0 + site.tau * s;
  return project_site(cavity_state, site.p, ktilde,
                      site.tau * (site.g - m) / spread, -site.tau / spread);
}

EpResult ep_fit(const Dataset& data, SparsePriorPtr prior,
                const Likelihood& lik, const EpConfig& cfg,
                const EpObserver& observer) {
  data.validate();
  validate(lik);
  cfg.validate();
  if (data.dim() != prior->kernel.dim()) {
    throw ShapeError("dataset dimension does not match the kernel");
  }
  if ((data.task == Task::Classification) != is_classification(lik)) {
    throw InvalidConfig("likelihood does not match the dataset task");
  }

  const Eigen::Index n = data.size();
  const Matrix ktilde_rows = prior->features.rows(data.inputs);
  const Matrix projections = prior->khat.solve(Matrix(ktilde_rows.transpose()));

  EpResult result{prior_state(prior), {}, {}};
  result.sites.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    result.sites[static_cast<std::size_t>(i)].p = projections.col(i);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(cfg.seed);
  auto& diag = result.diagnostics;

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double max_delta = 0.0;
    int skipped = 0;
    for (const Eigen::Index i : order) {
      auto& site = result.sites[static_cast<std::size_t>(i)];
      const Vector kt = ktilde_rows.row(i).transpose();
      const Deletion del =
          delete_site(result.state, site, kt, cfg.min_cavity_var);
      if (del.collapsed) {
        ++skipped;
        continue;
      }
      SiteDerivatives derivs;
      try {
        derivs = site_derivatives(data.targets[i], del.cavity, lik);
      } catch (const NumericalError&) {
        ++skipped;
        continue;
      }
      if (!std::isfinite(derivs.dlogZ) || !std::isfinite(derivs.d2logZ)) {
        ++skipped;
        continue;
      }
      const Inclusion inc = include_site(del, site, kt, derivs, cfg.damping,
                                         cfg.min_cavity_var);
      if (!inc.accepted) {
        ++skipped;
        continue;
      }
      PosteriorState updated =
          project_site(del.cavity_state, site.p, kt, inc.dlogZ, inc.d2logZ);
      max_delta = std::max({max_delta, std::abs(inc.site.g - site.g),
                            std::abs(inc.site.tau - site.tau)});
      if (observer) {
        observer({sweep, i, &del, derivs, &site, &inc, &updated, &kt});
      }
      result.state = std::move(updated);
      site = inc.site;
    }
    diag.sweeps = sweep;
    diag.max_delta = max_delta;
    diag.skipped_sites_per_sweep.push_back(skipped);
    diag.total_updates += n;
    if (max_delta < cfg.tol && skipped < n) {
      diag.converged = true;
      break;
    }
  }
  return result;
}

EpResult ep_fit(const Dataset& data, const RbfKernel& kernel,
                const BasisSet& basis, const Likelihood& lik,
                const EpConfig& cfg, const EpObserver& observer) {
  return ep_fit(data, make_sparse_prior(kernel, basis), lik, cfg, observer);
}

double predictive_class_probability(const PosteriorState& state,
                                    const Vector& x, const LabelNoise& lik) {
  const Vector kx = state.prior->features(x);
  const double mean = kx.dot(state.alpha);
  const double var = std::max(0.0, 1.0 - kx.dot(state.beta * kx));
  const double eps = lik.epsilon;
  return eps + (1.0 - 2.0 * eps) * std_normal_cdf(mean / std::sqrt(1.0 + var));
}

}  // namespace blurgp
