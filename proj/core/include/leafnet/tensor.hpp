#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafnet {

// Thrown whenever tensor extents do not line up for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_volume(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

inline std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  out += "]";
  return out;
}

// Dense row-major n-dimensional array. Element (i0,...,ik) lives at
// offset sum(i_j * stride_j) with strides derived from the shape.
// Carries activations, weights, and gradients throughout the library;
// instantiated with float for training and double for gradient checks.
template <typename T>
class TensorT {
  static_assert(std::is_floating_point_v<T>, "TensorT requires float or double");

 public:
  TensorT() = default;

  explicit TensorT(Shape shape, T fill = T{}) : shape_(std::move(shape)) {
    validate_shape();
    data_.assign(shape_volume(shape_), fill);
  }

  TensorT(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
    validate_shape();
    if (data_.size() != shape_volume(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_to_string(shape_));
    }
  }

  TensorT(Shape shape, std::initializer_list<T> values)
      : TensorT(std::move(shape), std::vector<T>(values)) {}

  static TensorT zeros(Shape shape) { return TensorT(std::move(shape), T{0}); }
  static TensorT full(Shape shape, T value) { return TensorT(std::move(shape), value); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  template <typename... Ix>
  T& at(Ix... index) {
    return data_[offset_of(index...)];
  }
  template <typename... Ix>
  const T& at(Ix... index) const {
    return data_[offset_of(index...)];
  }

  // Same data, new extents; volumes must agree.
  TensorT reshaped(Shape new_shape) const {
    if (shape_volume(new_shape) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " +
                       shape_to_string(new_shape));
    }
    return TensorT(std::move(new_shape), data_);
  }

  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  TensorT<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return TensorT<U>(shape_, std::move(out));
  }

 private:
  void validate_shape() const {
    if (shape_.empty()) throw ShapeError("tensor rank must be >= 1");
    for (std::size_t extent : shape_) {
      if (extent == 0) throw ShapeError("tensor extents must be >= 1, got " + shape_to_string(shape_));
    }
  }

  template <typename... Ix>
  std::size_t offset_of(Ix... index) const {
    const std::size_t ix[] = {static_cast<std::size_t>(index)...};
    constexpr std::size_t n = sizeof...(Ix);
    std::size_t offset = 0;
    for (std::size_t d = 0; d < n; ++d) offset = offset * shape_[d] + ix[d];
    return offset;
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

namespace detail {

template <typename T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()) + " differ");
  }
}

}  // namespace detail

// ---- elementwise --------------------------------------------------------

template <typename T, typename F>
TensorT<T> map_unary(const TensorT<T>& a, F&& fn) {
  TensorT<T> out(a.shape());
  const T* src = a.data();
  T* dst = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = fn(src[i]);
  return out;
}

template <typename T, typename F>
TensorT<T> zip_binary(const TensorT<T>& a, const TensorT<T>& b, F&& fn, const char* op = "zip") {
  detail::require_same_shape(a, b, op);
  TensorT<T> out(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* dst = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = fn(pa[i], pb[i]);
  return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  return zip_binary(a, b, [](T x, T y) { return x + y; }, "add");
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  return zip_binary(a, b, [](T x, T y) { return x - y; }, "sub");
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  return zip_binary(a, b, [](T x, T y) { return x * y; }, "mul");
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T s) {
  return map_unary(a, [s](T x) { return x * s; });
}

template <typename T>
void add_in_place(TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "add_in_place");
  T* pa = a.data();
  const T* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

template <typename T>
void fill(TensorT<T>& a, T value) {
  std::fill(a.values().begin(), a.values().end(), value);
}

// ---- matmul --------------------------------------------------------------

// dst must hold m*n zeros (or values the products are accumulated onto).
// i-k-j order keeps b row-contiguous in the inner loop.
template <typename T>
void matmul_into(T* dst, const T* a, const T* b, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = dst + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aval = a[i * k + p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aval * brow[j];
    }
  }
}

// c[i][j] = sum_p a[i][p] * b[p][j] for rank-2 operands.
template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul: expected rank-2 operands, got " + shape_to_string(a.shape()) +
                     " and " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.extent(0);
  const std::size_t k = a.extent(1);
  const std::size_t n = b.extent(1);
  if (b.extent(0) != k) {
    throw ShapeError("matmul: inner extents differ, " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  TensorT<T> c({m, n}, T{0});
  matmul_into(c.data(), a.data(), b.data(), m, k, n);
  return c;
}

template <typename T>
TensorT<T> transposed(const TensorT<T>& a) {
  if (a.rank() != 2) throw ShapeError("transposed: expected rank-2, got " + shape_to_string(a.shape()));
  const std::size_t m = a.extent(0);
  const std::size_t n = a.extent(1);
  TensorT<T> out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return out;
}

// ---- reductions ----------------------------------------------------------

template <typename T>
T sum(const TensorT<T>& a) {
  T acc{0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
  return acc;
}

template <typename T>
T mean(const TensorT<T>& a) {
  return sum(a) / static_cast<T>(a.size());
}

template <typename T>
T max_value(const TensorT<T>& a) {
  T best = a[0];
  for (std::size_t i = 1; i < a.size(); ++i) best = std::max(best, a[i]);
  return best;
}

// Smallest index wins ties, so predictions are deterministic.
template <typename T>
std::size_t argmax(const TensorT<T>& a) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i] > a[best]) best = i;
  }
  return best;
}

namespace detail {

inline void check_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError("reduce: axis " + std::to_string(axis) + " out of range for " +
                     shape_to_string(shape));
  }
}

// Decompose the index space around `axis` into outer x mid x inner blocks.
struct AxisBlocks {
  std::size_t outer, mid, inner;
};

inline AxisBlocks axis_blocks(const Shape& shape, std::size_t axis) {
  AxisBlocks b{1, shape[axis], 1};
  for (std::size_t d = 0; d < axis; ++d) b.outer *= shape[d];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) b.inner *= shape[d];
  return b;
}

inline Shape reduced_shape(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (d != axis) out.push_back(shape[d]);
  }
  if (out.empty()) out.push_back(1);  // reducing rank-1 yields a single-element tensor
  return out;
}

}  // namespace detail

template <typename T>
TensorT<T> sum(const TensorT<T>& a, std::size_t axis) {
  detail::check_axis(a.shape(), axis);
  const auto b = detail::axis_blocks(a.shape(), axis);
  TensorT<T> out(detail::reduced_shape(a.shape(), axis), T{0});
  for (std::size_t o = 0; o < b.outer; ++o)
    for (std::size_t m = 0; m < b.mid; ++m)
      for (std::size_t i = 0; i < b.inner; ++i)
        out[o * b.inner + i] += a[(o * b.mid + m) * b.inner + i];
  return out;
}

template <typename T>
TensorT<T> mean(const TensorT<T>& a, std::size_t axis) {
  detail::check_axis(a.shape(), axis);
  return scale(sum(a, axis), T{1} / static_cast<T>(a.extent(axis)));
}

template <typename T>
TensorT<T> max_value(const TensorT<T>& a, std::size_t axis) {
  detail::check_axis(a.shape(), axis);
  const auto b = detail::axis_blocks(a.shape(), axis);
  TensorT<T> out(detail::reduced_shape(a.shape(), axis));
  for (std::size_t o = 0; o < b.outer; ++o)
    for (std::size_t i = 0; i < b.inner; ++i) {
      T best = a[o * b.mid * b.inner + i];
      for (std::size_t m = 1; m < b.mid; ++m)
        best = std::max(best, a[(o * b.mid + m) * b.inner + i]);
      out[o * b.inner + i] = best;
    }
  return out;
}

// Indices along `axis`; smallest index wins ties.
template <typename T>
std::vector<std::size_t> argmax(const TensorT<T>& a, std::size_t axis) {
  detail::check_axis(a.shape(), axis);
  const auto b = detail::axis_blocks(a.shape(), axis);
  std::vector<std::size_t> out(b.outer * b.inner, 0);
  for (std::size_t o = 0; o < b.outer; ++o)
    for (std::size_t i = 0; i < b.inner; ++i) {
      std::size_t best = 0;
      T best_val = a[o * b.mid * b.inner + i];
      for (std::size_t m = 1; m < b.mid; ++m) {
        const T v = a[(o * b.mid + m) * b.inner + i];
        if (v > best_val) {
          best_val = v;
          best = m;
        }
      }
      out[o * b.inner + i] = best;
    }
  return out;
}

}  // namespace leafnet
