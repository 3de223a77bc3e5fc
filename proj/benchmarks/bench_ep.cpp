#include <benchmark/benchmark.h>

#include "blurgp/basis_selection.hpp"
#include "blurgp/data.hpp"
#include "blurgp/ep.hpp"

namespace {

using namespace blurgp;

// One full EP run on the circle data, fixed sweep count.
void BM_EpRegression(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Dataset data = synth_circle(200, kCircleNoiseXy, kCircleNoiseY, 1);
  const BasisSet basis = local_covariances(kmeans(data.inputs, m, 1), data.inputs, {CovKind::Full}).basis;
  EpConfig cfg;
  cfg.tol = 1e-300;
  cfg.max_sweeps = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ep_fit(data, RbfKernel(0.5, 2), basis, GaussianNoise{0.01}, cfg).state.alpha);
  }
  state.SetItemsProcessed(state.iterations() * data.size() * cfg.max_sweeps);
}
BENCHMARK(BM_EpRegression)->Arg(4)->Arg(16)->Arg(64);

void BM_EpClassification(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Dataset data = synth_gaussian_classes(200, 2, 1, GaussianClasses::nested_default()).first;
  const BasisSet basis = local_covariances(kmeans(data.inputs, m, 1), data.inputs, {CovKind::Full}).basis;
  EpConfig cfg = EpConfig::defaults_for(LabelNoise{});
  cfg.tol = 1e-300;
  cfg.max_sweeps = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ep_fit(data, RbfKernel(0.5, 2), basis, LabelNoise{0.0}, cfg).state.alpha);
  }
  state.SetItemsProcessed(state.iterations() * data.size() * cfg.max_sweeps);
}
BENCHMARK(BM_EpClassification)->Arg(3)->Arg(16)->Arg(64);

}  // namespace
