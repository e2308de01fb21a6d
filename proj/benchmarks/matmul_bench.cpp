#include <benchmark/benchmark.h>

#include "leafnet/rng.hpp"
#include "leafnet/tensor.hpp"

using namespace leafnet;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

}  // namespace

static void MatmulSquare(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Tensor a = random_matrix(n, n, 1);
  Tensor b = random_matrix(n, n, 2);
  for (auto _ : state) {
    Tensor c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(MatmulSquare)->RangeMultiplier(2)->Range(32, 512);

// dense-layer shape: tall activations times a narrow weight matrix
static void MatmulTall(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  Tensor a = random_matrix(rows, 256, 1);
  Tensor b = random_matrix(256, 64, 2);
  for (auto _ : state) {
    Tensor c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * rows * 256 * 64);
}
BENCHMARK(MatmulTall)->RangeMultiplier(4)->Range(32, 2048);
