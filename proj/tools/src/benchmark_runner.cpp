#include "blurgp/benchmark_runner.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "blurgp/ep.hpp"
#include "blurgp/error.hpp"
#include "blurgp/evaluation.hpp"
#include "blurgp/oracles.hpp"

namespace blurgp {
namespace {

struct Split {
  Dataset train;
  Dataset test;
};

Split make_split(const BenchmarkConfig& cfg, const Dataset* csv,
                 std::uint64_t seed) {
  if (cfg.dataset == "circle") {
    const int n = cfg.n_train > 0 ? cfg.n_train : 100;
    const int n_test = cfg.n_test > 0 ? cfg.n_test : 200;
    return {synth_circle(n, kCircleNoiseXy, kCircleNoiseY, seed),
            circle_grid(n_test)};
  }
  if (cfg.dataset == "synth-classes") {
    const int n = cfg.n_train > 0 ? cfg.n_train : 200;
    const int n_test = cfg.n_test > 0 ? cfg.n_test : 2000;
    auto [train, test] = synth_gaussian_classes(
        n, n_test, seed, GaussianClasses::nested_default());
    return {std::move(train), std::move(test)};
  }
  auto [train, test] = split(*csv, cfg.train_fraction, seed);
  Standardized s = standardize(train, test);
  return {std::move(s.train), std::move(s.test)};
}

Likelihood likelihood_for(const BenchmarkConfig& cfg, Task task) {
  if (task == Task::Classification) return LabelNoise{cfg.epsilon};
  return GaussianNoise{cfg.vy};
}

double evaluate(const PosteriorState& state, const Dataset& test,
                const Likelihood& lik) {
  if (const auto* ln = std::get_if<LabelNoise>(&lik)) {
    return error_rate(predict_probability(state, test.inputs, *ln),
                      test.targets);
  }
  return rmse(predict_regression(state, test.inputs).mean, test.targets);
}

void record_fit(BenchmarkRow& row, const EpResult& fit) {
  row.sweeps = fit.diagnostics.sweeps;
  row.converged = fit.diagnostics.converged;
  row.skipped_updates = fit.diagnostics.skipped_total();
  row.total_updates = fit.diagnostics.total_updates;
  const Matrix cov = basis_moments(fit.state).cov;
  const double scale = cov.diagonal().maxCoeff();
  row.basis_cov_min_eig_ratio =
      scale > 0.0 ? min_eigenvalue(cov) / scale : min_eigenvalue(cov);
}

BenchmarkRow make_row(const std::string& dataset, int m, std::string mode,
                      int repeat, const std::string& metric) {
  BenchmarkRow row;
  row.dataset = dataset;
  row.m = m;
  row.mode = std::move(mode);
  row.repeat = repeat;
  row.metric = metric;
  return row;
}

template <typename F>
void guarded(BenchmarkRow& row, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    row.value = std::numeric_limits<double>::quiet_NaN();
    row.sweeps = 0;
    row.converged = false;
    row.failure = e.what();
  }
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.dataset != "circle" && cfg.dataset != "synth-classes" &&
      cfg.dataset != "csv") {
    throw InvalidConfig("unknown benchmark dataset '" + cfg.dataset + "'");
  }
  if (cfg.repeats < 1) throw InvalidConfig("benchmark needs repeats >= 1");
  if (cfg.ms.empty() || cfg.modes.empty()) {
    throw InvalidConfig("benchmark needs at least one M and one mode");
  }
  for (int m : cfg.ms) {
    if (m < 1) throw InvalidConfig("benchmark M values must be >= 1");
  }
  if (!(cfg.sigma > 0.0)) throw InvalidConfig("sigma must be positive");

  Dataset csv;
  if (cfg.dataset == "csv") csv = load_csv(cfg.csv_path, cfg.csv_task);

  const Task task = cfg.dataset == "circle"          ? Task::Regression
                    : cfg.dataset == "synth-classes" ? Task::Classification
                                                     : cfg.csv_task;
  const Likelihood lik = likelihood_for(cfg, task);
  validate(lik);
  const EpConfig ep_cfg = EpConfig::defaults_for(lik);
  const std::string metric =
      task == Task::Classification ? "error_rate" : "rmse";

  const std::string label =
      cfg.dataset == "csv" ? cfg.csv_path.stem().string() : cfg.dataset;

  std::vector<Split> splits;
  for (int r = 0; r < cfg.repeats; ++r) {
    splits.push_back(make_split(cfg, &csv, cfg.base_seed + r));
  }

  std::vector<BenchmarkRow> rows;
  for (int m : cfg.ms) {
    for (CovKind mode : cfg.modes) {
      for (int r = 0; r < cfg.repeats; ++r) {
        const Split& s = splits[static_cast<std::size_t>(r)];
        BenchmarkRow row = make_row(label, m, to_string(mode), r, metric);
        guarded(row, [&] {
          const Clustering cl =
              kmeans(s.train.inputs, m, cfg.base_seed + 1000 + r);
          const LocalCovariances lc = local_covariances(
              cl, s.train.inputs, CovMode{mode, cfg.ridge});
          const EpResult fit =
              ep_fit(s.train, RbfKernel(cfg.sigma, s.train.dim()), lc.basis,
                     lik, ep_cfg);
          record_fit(row, fit);
          row.value = evaluate(fit.state, s.test, lik);
        });
        rows.push_back(std::move(row));
      }
    }
  }

  if (!cfg.reference) return rows;
  for (int r = 0; r < cfg.repeats; ++r) {
    const Split& s = splits[static_cast<std::size_t>(r)];
    const auto n = static_cast<int>(s.train.size());
    if (task == Task::Regression && n > 500) continue;
    BenchmarkRow row = make_row(label, n, "full-gp", r, metric);
    guarded(row, [&] {
      if (task == Task::Regression) {
        const oracle::ExactGp gp = oracle::exact_gp_regression(
            cfg.sigma, s.train.inputs, s.train.targets, cfg.vy, s.test.inputs);
        row.value = rmse(gp.mean, s.test.targets);
        row.converged = true;
        return;
      }
      std::vector<BlurredBasis> bases;
      for (Eigen::Index i = 0; i < s.train.size(); ++i) {
        bases.push_back({s.train.input(i), Matrix::Zero(s.train.dim(),
                                                        s.train.dim())});
      }
      const EpResult fit =
          ep_fit(s.train, RbfKernel(cfg.sigma, s.train.dim()),
                 BasisSet(std::move(bases)), lik, ep_cfg);
      record_fit(row, fit);
      row.value = evaluate(fit.state, s.test, lik);
    });
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_benchmark_csv(std::ostream& out,
                         const std::vector<BenchmarkRow>& rows) {
  out << "dataset,M,mode,repeat,metric,value,sweeps,converged\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.m << ',' << r.mode << ',' << r.repeat << ','
        << r.metric << ',' << format_double(r.value) << ',' << r.sweeps << ','
        << (r.converged ? "true" : "false") << '\n';
  }
}

}  // namespace blurgp
