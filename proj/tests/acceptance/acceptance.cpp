// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blurgp/basis_selection.hpp"
#include "blurgp/benchmark_runner.hpp"
#include "blurgp/cli.hpp"
#include "blurgp/data.hpp"
#include "blurgp/ep.hpp"
#include "blurgp/error.hpp"
#include "blurgp/kernel.hpp"
#include "blurgp/likelihood.hpp"
#include "blurgp/oracles.hpp"

using namespace blurgp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>()(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Vector direction(int d) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v.normalized();
  }
  Matrix psd(int d, double max_eig) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
    Vector lam(d);
    for (int i = 0; i < d; ++i) lam[i] = uniform(0.0, max_eig);
    const Matrix c = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (c + c.transpose());
  }

 private:
  std::mt19937_64 gen_;
};

// Worst basis-covariance eigenvalue ratio seen by any run, for criterion 8.
double g_worst_eig_ratio = std::numeric_limits<double>::infinity();

void record_health(const PosteriorState& s) {
  const BasisMoments bm = basis_moments(s);
  const double ratio = min_eigenvalue(bm.cov) / bm.cov.diagonal().cwiseAbs().maxCoeff();
  g_worst_eig_ratio = std::min(g_worst_eig_ratio, ratio);
}

Outcome kernel_integrals() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20240101);
  double worst_cross = 0.0, worst_khat = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 2;
    const double sigma = rng.uniform(0.5, 2.0);
    const RbfKernel k(sigma, d);
    const Vector b = rng.direction(d) * rng.uniform(0.0, 2.0);
    const Vector x = b + rng.direction(d) * rng.uniform(0.0, 3.0 * sigma);
    const BlurredBasis bi{b, rng.psd(d, 2.0)};
    const Vector bj_center = b + rng.direction(d) * rng.uniform(0.0, 3.0 * sigma);
    const BlurredBasis bj{bj_center, rng.psd(d, 2.0)};
    worst_cross = std::max(worst_cross,
                           std::abs(blurred_cross(k, x, bi) - oracle::quad_blurred_cross(sigma, x, bi.center, bi.cov)));
    worst_khat = std::max(worst_khat, std::abs(doubly_blurred(k, bi, bj) -
                                               oracle::quad_doubly_blurred(sigma, bi.center, bi.cov, bj.center, bj.cov)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_cross <= 1e-6 && worst_khat <= 1e-6 && secs < 120.0,
          fmt("200 cases, max |K~ err| %.2e, max |K^ err| %.2e, %.1f s", worst_cross, worst_khat, secs)};
}

Outcome exact_gp() {
  Rng rng(7);
  double worst = 0.0;
  bool converged = true;
  for (int n : {5, 15, 30}) {
    const double sigma = rng.uniform(0.5, 2.0);
    const double vy = rng.uniform(0.05, 1.0);
    Dataset data{Matrix(n, 2), Vector(n), Task::Regression};
    std::vector<BlurredBasis> bs;
    for (int i = 0; i < n; ++i) {
      data.inputs.row(i) << rng.uniform(-2, 2), rng.uniform(-2, 2);
      data.targets[i] = std::sin(data.inputs(i, 0)) * std::cos(data.inputs(i, 1)) + 0.2 * rng.normal();
      bs.push_back({data.input(i), Matrix::Zero(2, 2)});
    }
    const EpResult r = ep_fit(data, RbfKernel(sigma, 2), BasisSet(bs), GaussianNoise{vy}, EpConfig{});
    converged = converged && r.diagnostics.converged;
    record_health(r.state);
    Matrix q(n + 20, 2);
    q.topRows(n) = data.inputs;
    for (int i = 0; i < 20; ++i) q.row(n + i) << rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5);
    const auto gp = oracle::exact_gp_regression(sigma, data.inputs, data.targets, vy, q);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const Vector x = q.row(i).transpose();
      worst = std::max({worst, std::abs(predict_mean(r.state, x) - gp.mean[i]),
                        std::abs(predict_var(r.state, x) - gp.var[i])});
    }
  }
  return {converged && worst <= 1e-6, fmt("N in {5,15,30}, max |mean/var err| %.2e", worst)};
}

Outcome site_derivatives_check() {
  Rng rng(11);
  const oracle::QuadratureRule gh{oracle::RuleKind::GaussHermite, 32, 1e-10};
  double worst_reg_fd = 0.0, worst_reg_quad = 0.0, worst_cls = 0.0, max_z = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double y = 2.0 * rng.normal();
    const CavityMarginal cav{rng.uniform(-3, 3), rng.uniform(0.01, 3)};
    const GaussianNoise lik{rng.uniform(0.05, 1.0)};
    const SiteDerivatives d = site_derivatives_regression(y, cav, lik);
    const auto fd = oracle::finite_diff(
        [&](double m) { return site_derivatives_regression(y, {m, cav.var}, lik).logZ; }, cav.mean, 1e-3);
    const auto q = oracle::tilted_moments_quadrature(y, cav, lik, gh);
    worst_reg_fd = std::max({worst_reg_fd, std::abs(d.dlogZ - fd.first), std::abs(d.d2logZ - fd.second)});
    worst_reg_quad = std::max({worst_reg_quad, std::abs(d.dlogZ - q.dlogZ), std::abs(d.d2logZ - q.d2logZ)});
  }
  for (int t = 0; t < 200; ++t) {
    const double y = t % 2 == 0 ? 1.0 : -1.0;
    const double z = rng.uniform(-8.0, 8.0);
    const double v = rng.uniform(0.05, 4.0);
    const CavityMarginal cav{y * z * std::sqrt(v), v};
    const LabelNoise lik{t % 4 < 2 ? 0.0 : rng.uniform(0.0, 0.2)};
    const SiteDerivatives d = site_derivatives_classification(y, cav, lik);
    const auto q = oracle::tilted_moments_quadrature(y, cav, lik, gh);
    worst_cls = std::max({worst_cls, std::abs(d.dlogZ - q.dlogZ), std::abs(d.d2logZ - q.d2logZ)});
    max_z = std::max(max_z, std::abs(z));
  }
  const double worst = std::max({worst_reg_fd, worst_reg_quad, worst_cls});
  return {worst <= 1e-6,
          fmt("regression vs finite diff %.2e, vs quadrature %.2e; classification vs quadrature %.2e (|z| <= %.2f)",
              worst_reg_fd, worst_reg_quad, worst_cls, max_z)};
}

Outcome round_trip() {
  const auto [train, test] = synth_gaussian_classes(200, 2, 5, GaussianClasses::nested_default());
  const Clustering cl = kmeans(train.inputs, 6, 9);
  const BasisSet basis = local_covariances(cl, train.inputs, {CovKind::Full}).basis;
  Rng rng(13);
  const long long events = 3 * train.size();
  std::set<long long> chosen;
  while (chosen.size() < 100) chosen.insert(rng.integer(0, static_cast<int>(events - 1)));
  EpConfig cfg = EpConfig::defaults_for(LabelNoise{});
  cfg.max_sweeps = 3;
  long long counter = 0;
  int checked = 0;
  double worst_alpha = 0.0, worst_beta = 0.0;
  const EpResult r = ep_fit(train, RbfKernel(0.5, 2), basis, LabelNoise{0.0}, cfg, [&](const SiteUpdateEvent& e) {
    if (chosen.count(counter++) == 0) return;
    const Deletion again = delete_site(*e.updated_state, e.inclusion->site, *e.ktilde);
    worst_alpha = std::max(worst_alpha, (again.cavity_state.alpha - e.deletion->cavity_state.alpha).cwiseAbs().maxCoeff());
    worst_beta = std::max(worst_beta, (again.cavity_state.beta - e.deletion->cavity_state.beta).cwiseAbs().maxCoeff());
    ++checked;
  });
  record_health(r.state);
  return {checked == 100 && worst_alpha <= 1e-10 && worst_beta <= 1e-10,
          fmt("%d steps, max |d alpha| %.2e, max |d beta| %.2e", checked, worst_alpha, worst_beta)};
}

struct ModeStats {
  std::map<std::string, std::vector<double>> by_mode;
  long long skipped = 0;
  long long total = 0;
  int failures = 0;
};

ModeStats collect(const std::vector<BenchmarkRow>& rows) {
  ModeStats s;
  for (const auto& row : rows) {
    s.by_mode[row.mode].push_back(row.value);
    s.skipped += row.skipped_updates;
    s.total += row.total_updates;
    if (!row.failure.empty()) ++s.failures;
    g_worst_eig_ratio = std::min(g_worst_eig_ratio, row.basis_cov_min_eig_ratio);
  }
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

long long g_skipped = 0;
long long g_updates = 0;

Outcome circle_ordering() {
  BenchmarkConfig cfg;
  cfg.dataset = "circle";
  cfg.ms = {4};
  cfg.repeats = 10;
  cfg.reference = false;
  const ModeStats s = collect(run_benchmark(cfg));
  g_skipped += s.skipped;
  g_updates += s.total;
  const auto& full = s.by_mode.at("full");
  const auto& sphere = s.by_mode.at("sphere");
  const auto& zero = s.by_mode.at("zero");
  int ordered = 0;
  for (std::size_t r = 0; r < full.size(); ++r) {
    if (full[r] <= sphere[r] && sphere[r] <= zero[r]) ++ordered;
  }
  const bool pass = s.failures == 0 && ordered >= 8 && mean(full) < mean(zero);
  return {pass, fmt("full <= sphere <= zero in %d/10 seeds (need 8); mean RMSE full %.4f, sphere %.4f, zero %.4f",
                    ordered, mean(full), mean(sphere), mean(zero))};
}

Outcome class_ordering() {
  BenchmarkConfig cfg;
  cfg.dataset = "synth-classes";
  cfg.ms = {3};
  cfg.repeats = 10;
  cfg.reference = false;
  const ModeStats s = collect(run_benchmark(cfg));
  g_skipped += s.skipped;
  g_updates += s.total;
  const double full = mean(s.by_mode.at("full"));
  const double sphere = mean(s.by_mode.at("sphere"));
  const double zero = mean(s.by_mode.at("zero"));
  const bool ordered = full <= sphere && full <= zero;
  const bool in_band = full >= 0.05 && full <= 0.30;
  return {s.failures == 0 && ordered && in_band,
          fmt("mean error full %.4f, sphere %.4f, zero %.4f; ordering %s; band [0.05, 0.30] %s", full, sphere,
              zero, ordered ? "holds" : "violated", in_band ? "holds" : "violated")};
}

Outcome determinism() {
  const std::vector<std::vector<std::string>> runs{
      {"benchmark", "--dataset", "circle", "--m", "4", "--out", "-"},
      {"benchmark", "--dataset", "synth-classes", "--m", "3", "--out", "-"}};
  std::size_t bytes = 0;
  for (const auto& args : runs) {
    std::ostringstream a, b, err;
    const int ca = cli::run(args, a, err);
    const int cb = cli::run(args, b, err);
    if (ca != 0 || cb != 0) return {false, "benchmark exited with an error: " + err.str()};
    if (a.str() != b.str()) return {false, "CSV differs between runs for " + args[2]};
    bytes += a.str().size();
  }
  return {true, fmt("circle and synth-classes benchmark CSVs identical across runs (%zu bytes)", bytes)};
}

Outcome psd_health() {
  const double frac = g_updates > 0 ? static_cast<double>(g_skipped) / static_cast<double>(g_updates) : 0.0;
  return {g_worst_eig_ratio >= -1e-8 && frac <= 0.05,
          fmt("worst min-eigenvalue / max-diagonal %.2e; skipped %lld of %lld updates (%.2f%%) on circle and class runs",
              g_worst_eig_ratio, g_skipped, g_updates, 100.0 * frac)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 kernel integrals vs quadrature", kernel_integrals},
      {"2 EP equals exact GP regression", exact_gp},
      {"3 site derivatives", site_derivatives_check},
      {"4 delete after include recovers cavity", round_trip},
      {"5 circle covariance-mode ordering", circle_ordering},
      {"6 Gaussian-class ordering and band", class_ordering},
      {"7 benchmark determinism", determinism},
      {"8 PSD health and skipped updates", psd_health}};
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
