#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "leafnet/layers.hpp"
#include "leafnet/rng.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet::testing {

template <typename T>
TensorT<T> random_uniform(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  TensorT<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
TensorT<T> random_integers(Rng& rng, Shape shape, int lo = -4, int hi = 4) {
  TensorT<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<T>(lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))));
  return t;
}

// Direct quadruple-loop convolution; the independent oracle the im2col
// implementation is verified against. Supports valid and same padding.
template <typename T>
TensorT<T> naive_conv2d(const TensorT<T>& input, const TensorT<T>& kernels, const TensorT<T>& bias,
                        Padding padding) {
  const std::size_t n = input.extent(0), h = input.extent(1), w = input.extent(2),
                    ci = input.extent(3), co = kernels.extent(3);
  const std::ptrdiff_t pad = padding == Padding::same ? 1 : 0;
  const std::size_t oh = h + 2 * pad - 2, ow = w + 2 * pad - 2;
  TensorT<T> out({n, oh, ow, co});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t o = 0; o < co; ++o) {
          T acc = bias[o];
          for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx) {
              const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + dy) - pad;
              const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + dx) - pad;
              if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h) || sx < 0 ||
                  sx >= static_cast<std::ptrdiff_t>(w)) {
                continue;
              }
              for (std::size_t i = 0; i < ci; ++i)
                acc += input.at(b, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx), i) *
                       kernels.at(dy, dx, i, o);
            }
          out.at(b, y, x, o) = acc;
        }
  return out;
}

// Relative error with a floor, so near-zero gradients are compared at
// tol * floor absolute rather than blowing up the quotient.
inline double relative_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central finite differences of `loss` wrt every element of `values`,
// compared against the analytic gradient. Returns the worst relative error.
template <typename LossFn>
double max_fd_error(TensorD& values, const TensorD& analytic, LossFn&& loss, double step = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x0 = values[i];
    values[i] = x0 + step;
    const double fp = loss();
    values[i] = x0 - step;
    const double fm = loss();
    values[i] = x0;
    const double numeric = (fp - fm) / (2.0 * step);
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

// Sampling guards that keep finite differences away from the kinks.
inline bool away_from_relu_kink(const TensorD& t, double margin = 1e-3) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i]) < margin) return false;
  }
  return true;
}

inline bool pool_windows_separated(const TensorD& input, double margin = 1e-3) {
  const std::size_t n = input.extent(0), h = input.extent(1), w = input.extent(2),
                    c = input.extent(3);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y + 1 < h; y += 2)
      for (std::size_t x = 0; x + 1 < w; x += 2)
        for (std::size_t ch = 0; ch < c; ++ch) {
          double vals[4] = {input.at(b, y, x, ch), input.at(b, y, x + 1, ch),
                            input.at(b, y + 1, x, ch), input.at(b, y + 1, x + 1, ch)};
          std::sort(vals, vals + 4);
          for (int i = 0; i < 3; ++i) {
            if (vals[i + 1] - vals[i] < margin) return false;
          }
        }
  return true;
}

// Scalar objective for layer-level checks: a fixed random weighting of the
// layer output, so every output element influences the loss.
inline double weighted_sum(const TensorD& out, const TensorD& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * weights[i];
  return acc;
}

}  // namespace leafnet::testing
