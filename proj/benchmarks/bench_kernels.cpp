#include <benchmark/benchmark.h>

#include "tnsynth/rank_search.hpp"
#include "tnsynth/rng.hpp"
#include "tnsynth/search.hpp"
#include "tnsynth/sketch.hpp"
#include "tnsynth/tensor.hpp"

using namespace tnsynth;

namespace {

Tensor random_tensor(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::vector<Index> indices;
    for (std::size_t i = 0; i < dims.size(); ++i)
        indices.push_back(Index{static_cast<IndexId>(i), "I" + std::to_string(i + 1), dims[i]});
    Tensor t = Tensor::zeros(indices);
    Rng rng(seed);
    for (double& v : t.mutable_data()) v = rng.normal();
    return t;
}

void BM_permute(benchmark::State& state) {
    const Tensor t = random_tensor({32, 32, 32, 8}, 1);
    const std::vector<std::size_t> order{3, 1, 0, 2};
    for (auto _ : state) benchmark::DoNotOptimize(permute(t, order));
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(t.element_count()));
}
BENCHMARK(BM_permute);

void BM_matricize(benchmark::State& state) {
    const Tensor t = random_tensor({16, 18, 20, 22}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(matricize(t, {1, 3}));
}
BENCHMARK(BM_matricize);

void BM_spectrum(benchmark::State& state) {
    const Tensor t = random_tensor({16, 18, 20, 22}, 3);
    const auto parts = canonical_partitions(t.indices());
    for (auto _ : state) {
        SpectrumTable table(t);
        for (const auto& p : parts) benchmark::DoNotOptimize(table.at(p));
    }
}
BENCHMARK(BM_spectrum);

void BM_contract_all(benchmark::State& state) {
    const SyntheticInstance inst = generate_synthetic({16, 18, 20, 22}, 3, 5, 4);
    for (auto _ : state) benchmark::DoNotOptimize(contract_all(inst.ground_truth));
}
BENCHMARK(BM_contract_all);

void BM_enumerate_sketches(benchmark::State& state) {
    std::vector<Index> modes;
    for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i)
        modes.push_back(Index{static_cast<IndexId>(i), "I" + std::to_string(i + 1), 2});
    for (auto _ : state) {
        SketchEnumerator en(SketchSpace{modes, 6});
        std::size_t count = 0;
        while (en.next()) ++count;
        benchmark::DoNotOptimize(count);
    }
}
BENCHMARK(BM_enumerate_sketches)->Arg(4)->Arg(5)->Arg(6);

void BM_search_order4(benchmark::State& state) {
    const SyntheticInstance inst = generate_synthetic({16, 18, 20, 22}, 2, 5, 5);
    SearchConfig cfg;
    cfg.eps = 1e-6;
    for (auto _ : state) benchmark::DoNotOptimize(search_structure(inst.tensor, cfg));
}
BENCHMARK(BM_search_order4)->Unit(benchmark::kMillisecond);

void BM_reuse_order4(benchmark::State& state) {
    const SyntheticInstance inst = generate_synthetic({16, 18, 20, 22}, 2, 5, 5);
    SearchConfig cfg;
    cfg.eps = 1e-6;
    const SearchResult full = search_structure(inst.tensor, cfg);
    Sketch winner;
    int hole = 0;
    for (const auto& e : full.program.exprs) winner.exprs.push_back(Expr{e.block, Hole{hole++}});
    for (auto _ : state)
        benchmark::DoNotOptimize(decompose_with_topology(inst.tensor, winner, cfg.eps, cfg));
    state.SetLabel("winner splits: " + std::to_string(winner.size()));
}
BENCHMARK(BM_reuse_order4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
