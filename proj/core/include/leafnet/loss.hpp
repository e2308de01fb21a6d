#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "leafnet/tensor.hpp"

namespace leafnet {

// Row-wise softmax with max-subtraction for stability.
template <typename T>
TensorT<T> softmax(const TensorT<T>& logits) {
  if (logits.rank() != 2 || logits.extent(1) < 2) {
    throw ShapeError("softmax: expected [n, C] with C >= 2, got " +
                     shape_to_string(logits.shape()));
  }
  if (!logits.all_finite()) throw std::invalid_argument("softmax: logits contain non-finite values");
  const std::size_t n = logits.extent(0), c = logits.extent(1);
  TensorT<T> out({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = logits.data() + i * c;
    T* dst = out.data() + i * c;
    T m = row[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    T denom{0};
    for (std::size_t j = 0; j < c; ++j) {
      dst[j] = std::exp(row[j] - m);
      denom += dst[j];
    }
    for (std::size_t j = 0; j < c; ++j) dst[j] /= denom;
  }
  return out;
}

template <typename T>
struct LossResult {
  T loss;
  TensorT<T> logits_grad;  // gradient of the mean loss wrt the pre-softmax logits
};

// Categorical cross-entropy over softmax probabilities.
//   loss = -(1/n) sum_i ln p[i, target_i]   with p clamped at 1e-12
// The returned gradient is the combined softmax+CE gradient wrt the logits,
// (p - onehot) / n.
template <typename T>
LossResult<T> cross_entropy(const TensorT<T>& probabilities, std::span<const int> targets) {
  if (probabilities.rank() != 2) {
    throw ShapeError("cross_entropy: expected [n, C] probabilities, got " +
                     shape_to_string(probabilities.shape()));
  }
  const std::size_t n = probabilities.extent(0), c = probabilities.extent(1);
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(n) + " rows");
  }
  constexpr double kClamp = 1e-12;
  T loss{0};
  TensorT<T> grad({n, c});
  const T inv_n = T{1} / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= c) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) + " out of range for " +
                              std::to_string(c) + " classes");
    }
    const T* row = probabilities.data() + i * c;
    loss -= std::log(std::max(row[static_cast<std::size_t>(t)], static_cast<T>(kClamp)));
    T* grow = grad.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) {
      grow[j] = (row[j] - (static_cast<std::size_t>(t) == j ? T{1} : T{0})) * inv_n;
    }
  }
  return {loss * inv_n, std::move(grad)};
}

}  // namespace leafnet
