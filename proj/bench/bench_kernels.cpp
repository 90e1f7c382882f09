// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "hice/parallel.hpp"
#include "hice/scoring.hpp"
#include "hice/similarity.hpp"

namespace {

using hice::testing::random_bundle;
using hice::testing::random_embedding;

struct Sets {
  hice::EmbeddingSet rows;
  hice::EmbeddingSet cols;
};

Sets make_sets(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(2024);
  Sets s{hice::EmbeddingSet(dim), hice::EmbeddingSet(dim)};
  for (std::size_t i = 0; i < n; ++i) s.rows.add(random_embedding(rng, dim));
  for (std::size_t i = 0; i < n; ++i) s.cols.add(random_embedding(rng, dim));
  return s;
}

std::vector<hice::EvalBundle> make_bundles(std::size_t n) {
  std::mt19937_64 rng(2025);
  hice::testing::RandomBundleShape shape;
  shape.min_dim = 256;
  shape.max_dim = 512;
  shape.max_regions = 36;
  shape.max_phrases = 12;
  std::vector<hice::EvalBundle> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_bundle(rng, "b" + std::to_string(i), shape));
  return out;
}

void BM_SimMatrixSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sets s = make_sets(n, 512);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    hice::kernels::sim_matrix_serial(s.rows, s.cols, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_SimMatrixParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sets s = make_sets(n, 512);
  std::vector<double> out(n * n);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    hice::kernels::sim_matrix_parallel(s.rows, s.cols, out, threads);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_ScoreBatchSerial(benchmark::State& state) {
  const auto bundles = make_bundles(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hice::score_batch_serial(bundles, hice::Scorer::hice));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreBatchParallel(benchmark::State& state) {
  const auto bundles = make_bundles(static_cast<std::size_t>(state.range(0)));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(hice::score_batch(bundles, hice::Scorer::hice, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SimMatrixSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_SimMatrixParallel)->Args({64, 2})->Args({64, 4})->Args({256, 2})->Args({256, 4})->UseRealTime();
BENCHMARK(BM_ScoreBatchSerial)->Arg(256);
BENCHMARK(BM_ScoreBatchParallel)->Args({256, 2})->Args({256, 4})->UseRealTime();

BENCHMARK_MAIN();
