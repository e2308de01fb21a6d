#include <benchmark/benchmark.h>

#include "leafnet/rng.hpp"
#include "leafnet/transforms.hpp"

using namespace leafnet;

namespace {

Tensor random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({h, w, 3});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(0, 255));
  return t;
}

}  // namespace

static void ResizeBilinearTo256(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  Tensor img = random_image(side, side, 1);
  for (auto _ : state) {
    Tensor out = resize_bilinear(img, 256, 256);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(ResizeBilinearTo256)->Arg(128)->Arg(512)->Arg(1024);

static void Rotate10Degrees(benchmark::State& state) {
  Tensor img = random_image(256, 256, 1);
  for (auto _ : state) {
    Tensor out = rotate_ccw(img, 10.0);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(Rotate10Degrees);

static void AugmentAllFour(benchmark::State& state) {
  Tensor img = random_image(256, 256, 1);
  for (auto _ : state) {
    auto variants = augment_record(img);
    benchmark::DoNotOptimize(variants[3].data());
  }
}
BENCHMARK(AugmentAllFour);
