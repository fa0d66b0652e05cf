#include <benchmark/benchmark.h>

#include "arbor/dimension.hpp"
#include "arbor/permquot.hpp"
#include "arbor/zoo.hpp"

namespace {

void BM_GrigorchukQuotient(benchmark::State& state) {
  arbor::GroupSpec g = arbor::grigorchuk();
  std::size_t level = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto q = arbor::quotient(g.gens, level);
    benchmark::DoNotOptimize(q.order());
  }
}
BENCHMARK(BM_GrigorchukQuotient)->DenseRange(3, 7);

void BM_LevelPerm(benchmark::State& state) {
  arbor::Expr a = arbor::adding_machine(2);
  std::size_t level = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(arbor::level_perm(a, level));
}
BENCHMARK(BM_LevelPerm)->DenseRange(6, 12, 2);

void BM_TargetAntichain(benchmark::State& state) {
  mpq_class third(1, 3);
  for (auto _ : state) {
    auto sch = arbor::antichain_for_target(third, 2);
    auto mi = arbor::mu(arbor::WeightedAntichain(sch), static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(mi.lo.get_d());
  }
}
BENCHMARK(BM_TargetAntichain)->Arg(16)->Arg(32);

void BM_SunicEnclosure(benchmark::State& state) {
  arbor::GroupSpec g = arbor::sunic_generalized(arbor::SunicParams{{arbor::Perm::cycle(2)}, 2});
  arbor::WreathAmbient amb{2, 2};
  for (auto _ : state) {
    auto e = arbor::hdim_selfsimilar_enclosure(g.gens, amb, 6);
    benchmark::DoNotOptimize(e.value.lo);
  }
}
BENCHMARK(BM_SunicEnclosure);

}  // namespace

BENCHMARK_MAIN();
