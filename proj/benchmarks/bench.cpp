#include <benchmark/benchmark.h>

#include <cmath>

#include "shiftconv/bessel.hpp"
#include "shiftconv/characters.hpp"
#include "shiftconv/coeffs.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/lfun.hpp"
#include "shiftconv/voronoi.hpp"
#include "shiftconv/weights.hpp"

using namespace shiftconv;

namespace {

// direct evaluation vs the cached Chebyshev table, J_1 and M- at mu = 0
void BM_KernelDirect(benchmark::State& state) {
  const auto spec = state.range(0) ? KernelSpec::Mminus(0) : KernelSpec::J(1);
  double x = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_kernel_ld(spec, x));
    x = x > 20 ? 0.3 : x * 1.01;
  }
}
BENCHMARK(BM_KernelDirect)->Arg(0)->Arg(1);

void BM_KernelTable(benchmark::State& state) {
  const auto& t = kernel_table(state.range(0) ? KernelSpec::Mminus(0) : KernelSpec::J(1));
  // pieces are built lazily; touch them all first
  for (long double x = 0.3L; x <= 21; x += 0.01L) benchmark::DoNotOptimize(t(x));
  long double x = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t(x));
    x = x > 20 ? 0.3L : x * 1.01L;
  }
}
BENCHMARK(BM_KernelTable)->Arg(0)->Arg(1);

void BM_Tau(benchmark::State& state) {
  const auto method = state.range(1) ? TauMethod::Squaring : TauMethod::Sparse;
  for (auto _ : state) benchmark::DoNotOptimize(ramanujan_tau(state.range(0), method));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Tau)->Args({1 << 14, 0})->Args({1 << 14, 1})->Args({1 << 18, 1})->Unit(benchmark::kMillisecond);

void BM_Kloosterman(benchmark::State& state) {
  const i64 q = state.range(0);
  i64 m = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kloosterman(KloostermanQuery{m, 3, q, std::nullopt}));
    m = m % 97 + 1;
  }
}
BENCHMARK(BM_Kloosterman)->Arg(101)->Arg(997)->Arg(9973);

void BM_TwistedKloosterman(benchmark::State& state) {
  const i64 q = state.range(0);
  const auto chi = CharacterGroup(q).primitive().back();
  for (auto _ : state) benchmark::DoNotOptimize(kloosterman(KloostermanQuery{5, 3, q, chi}));
}
BENCHMARK(BM_TwistedKloosterman)->Arg(101)->Arg(997);

void BM_TransformHat(benchmark::State& state) {
  const auto g = bump_weight(static_cast<double>(state.range(0)));
  const auto h = transform_g_hat(g, 5, 1);
  double y = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h(y));
    y = y > 50 ? 0.5 : y * 1.1;
  }
}
BENCHMARK(BM_TransformHat)->Arg(100)->Arg(10000);

void BM_TransformPm(benchmark::State& state) {
  const auto g = bump_weight(100);
  const auto h = transform_g_pm(g, 5, 0, state.range(0) ? -1 : 1);
  double y = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h(y));
    y = y > 50 ? 0.5 : y * 1.1;
  }
}
BENCHMARK(BM_TransformPm)->Arg(0)->Arg(1);

void BM_Afe(benchmark::State& state) {
  static const auto src = delta_coefficients(1 << 16);
  const i64 q = state.range(0);
  LValueRequest r;
  r.phi = src;
  r.chi = CharacterGroup(q).primitive().front();
  for (auto _ : state) benchmark::DoNotOptimize(afe_lvalue(r));
}
BENCHMARK(BM_Afe)->Arg(11)->Arg(101)->Arg(997)->Unit(benchmark::kMillisecond);

void BM_AfeAllCharacters(benchmark::State& state) {
  static const auto src = delta_coefficients(1 << 16);
  for (auto _ : state) benchmark::DoNotOptimize(afe_lvalues_mod(src, state.range(0)));
}
BENCHMARK(BM_AfeAllCharacters)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
