#include <random>

#include <benchmark/benchmark.h>

#include "blurgp/kernel.hpp"

namespace {

using namespace blurgp;

BasisSet random_basis(int m, int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<BlurredBasis> bs;
  for (int k = 0; k < m; ++k) {
    Vector b(d);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i) b[i] = nd(gen);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = 0.3 * nd(gen);
    bs.push_back({b, a * a.transpose()});
  }
  return BasisSet(std::move(bs));
}

void BM_BlurredCross(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const RbfKernel k(0.7, d);
  const BasisSet basis = random_basis(1, d, 1);
  const Vector x = Vector::Constant(d, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(blurred_cross(k, x, basis[0]));
}
BENCHMARK(BM_BlurredCross)->Arg(1)->Arg(2)->Arg(8)->Arg(32);

void BM_FeaturesCached(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const RbfKernel k(0.7, 2);
  const BasisSet basis = random_basis(m, 2, 2);
  const BlurredFeatures features(k, basis);
  const Vector x = Vector::Constant(2, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(features(x));
  state.SetComplexityN(m);
}
BENCHMARK(BM_FeaturesCached)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_GramKhat(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const RbfKernel k(0.7, 2);
  const BasisSet basis = random_basis(m, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gram_khat(k, basis).jitter);
  state.SetComplexityN(m);
}
BENCHMARK(BM_GramKhat)->RangeMultiplier(2)->Range(4, 128)->Complexity();

}  // namespace
