#include <benchmark/benchmark.h>

#include "leafnet/layers.hpp"
#include "leafnet/rng.hpp"

using namespace leafnet;

namespace {

Tensor random_nhwc(std::size_t n, std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({n, h, w, c});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(0, 1));
  return t;
}

// direct quadruple-loop convolution, the shape the im2col path is measured against
Tensor conv_direct(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  const std::size_t n = input.extent(0), h = input.extent(1), w = input.extent(2),
                    ci = input.extent(3), co = kernels.extent(3);
  Tensor out({n, h - 2, w - 2, co});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y + 2 < h; ++y)
      for (std::size_t x = 0; x + 2 < w; ++x)
        for (std::size_t o = 0; o < co; ++o) {
          float acc = bias[o];
          for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx)
              for (std::size_t i = 0; i < ci; ++i)
                acc += input.at(b, y + dy, x + dx, i) * kernels.at(dy, dx, i, o);
          out.at(b, y, x, o) = acc;
        }
  return out;
}

}  // namespace

static void ConvIm2col(benchmark::State& state) {
  const std::size_t hw = static_cast<std::size_t>(state.range(0));
  Tensor input = random_nhwc(1, hw, hw, 32, 1);
  Conv2d<float> conv(32, 64);
  Rng rng(2);
  conv.init(rng);
  Rng unused(0);
  for (auto _ : state) {
    Tensor out = conv.forward(input, Mode::infer, unused);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(ConvIm2col)->Arg(32)->Arg(64)->Arg(128);

static void ConvDirect(benchmark::State& state) {
  const std::size_t hw = static_cast<std::size_t>(state.range(0));
  Tensor input = random_nhwc(1, hw, hw, 32, 1);
  Conv2d<float> conv(32, 64);
  Rng rng(2);
  conv.init(rng);
  for (auto _ : state) {
    Tensor out = conv_direct(input, conv.kernels(), conv.bias());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(ConvDirect)->Arg(32)->Arg(64)->Arg(128);

static void ConvBackward(benchmark::State& state) {
  const std::size_t hw = static_cast<std::size_t>(state.range(0));
  Tensor input = random_nhwc(2, hw, hw, 32, 1);
  Conv2d<float> conv(32, 64);
  Rng rng(2);
  conv.init(rng);
  Rng unused(0);
  Tensor out = conv.forward(input, Mode::train, unused);
  Tensor upstream = random_nhwc(out.extent(0), out.extent(1), out.extent(2), out.extent(3), 3);
  for (auto _ : state) {
    conv.zero_grad();
    Tensor g = conv.backward(upstream);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(ConvBackward)->Arg(32)->Arg(64);
