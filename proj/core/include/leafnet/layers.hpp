#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "leafnet/parallel.hpp"
#include "leafnet/rng.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet {

enum class Mode { train, infer };

enum class LayerKind { conv, maxpool, relu, flatten, dense, batchnorm, dropout };

enum class Padding { valid, same };

inline const char* padding_name(Padding p) { return p == Padding::valid ? "valid" : "same"; }

// A trainable parameter and its gradient buffer, exposed to the optimizer
// and the checkpoint writer. Gradient shape always mirrors the value shape.
template <typename T>
struct ParamSlot {
  TensorT<T>* value;
  TensorT<T>* grad;
  std::string name;
};

// Non-trainable tensors that still belong in a checkpoint (BN running stats).
template <typename T>
struct StateSlot {
  TensorT<T>* value;
  std::string name;
};

// One stage of the network. forward() caches whatever backward() needs, so a
// layer instance is owned by exactly one training run; evaluating different
// samples concurrently requires separate instances.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual TensorT<T> forward(const TensorT<T>& input, Mode mode, Rng& rng) = 0;
  // Returns the gradient wrt the layer input and accumulates parameter
  // gradients from the last forward() call.
  virtual TensorT<T> backward(const TensorT<T>& upstream) = 0;

  virtual LayerKind kind() const = 0;
  virtual std::string describe() const = 0;

  virtual std::vector<ParamSlot<T>> trainable() { return {}; }
  virtual std::vector<StateSlot<T>> state() { return {}; }

  void zero_grad() {
    for (auto& slot : trainable()) fill(*slot.grad, T{0});
  }
};

namespace detail {

template <typename T>
void require_rank4(const TensorT<T>& t, const char* who) {
  if (t.rank() != 4) {
    throw ShapeError(std::string(who) + ": expected [batch,h,w,channels], got " +
                     shape_to_string(t.shape()));
  }
}

}  // namespace detail

// ---- 2-D convolution -------------------------------------------------------
//
// 3x3 cross-correlation, stride 1, padding valid or same (zero padding 1).
// out[b,y,x,o] = bias[o] + sum_{dy,dx,i} in[b, y+dy-p, x+dx-p, i] * K[dy,dx,i,o]
//
// Implemented as im2col + matmul: the [3,3,c_in,c_out] kernel tensor viewed
// flat is exactly the [9*c_in, c_out] matrix the unrolled patches multiply.
// Patches are materialized per sample to bound memory at one sample's worth.
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, Padding padding = Padding::valid)
      : in_channels_(in_channels),
        out_channels_(out_channels),
        padding_(padding),
        kernels_({kKernel, kKernel, in_channels, out_channels}, T{0}),
        bias_({out_channels}, T{0}),
        kernels_grad_(kernels_.shape(), T{0}),
        bias_grad_(bias_.shape(), T{0}) {}

  // He-uniform over fan_in = 9 * c_in; biases stay zero.
  void init(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(kKernel * kKernel * in_channels_));
    for (std::size_t i = 0; i < kernels_.size(); ++i)
      kernels_[i] = static_cast<T>(rng.uniform(-bound, bound));
    fill(bias_, T{0});
  }

  TensorT<T> forward(const TensorT<T>& input, Mode, Rng&) override {
    detail::require_rank4(input, "conv2d");
    const std::size_t n = input.extent(0), h = input.extent(1), w = input.extent(2);
    if (input.extent(3) != in_channels_) {
      throw ShapeError("conv2d: input has " + std::to_string(input.extent(3)) +
                       " channels, layer expects " + std::to_string(in_channels_));
    }
    const std::size_t pad = pad_amount();
    if (h + 2 * pad < kKernel || w + 2 * pad < kKernel) {
      throw ShapeError("conv2d: spatial input " + shape_to_string(input.shape()) +
                       " too small for a 3x3 kernel with " + padding_name(padding_) + " padding");
    }
    const std::size_t oh = h + 2 * pad - (kKernel - 1);
    const std::size_t ow = w + 2 * pad - (kKernel - 1);

    input_cache_ = input;
    TensorT<T> out({n, oh, ow, out_channels_});
    const std::size_t patch_len = kKernel * kKernel * in_channels_;
    parallel_for(n, [&](std::size_t b) {
      std::vector<T> patches(oh * ow * patch_len);
      im2col_sample(input, b, pad, oh, ow, patches.data());
      T* dst = out.data() + b * oh * ow * out_channels_;
      for (std::size_t r = 0; r < oh * ow; ++r) {
        T* row = dst + r * out_channels_;
        for (std::size_t o = 0; o < out_channels_; ++o) row[o] = bias_[o];
      }
      matmul_into(dst, patches.data(), kernels_.data(), oh * ow, patch_len, out_channels_);
    });
    return out;
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    const TensorT<T>& input = input_cache_;
    const std::size_t n = input.extent(0), h = input.extent(1), w = input.extent(2);
    const std::size_t pad = pad_amount();
    const std::size_t oh = h + 2 * pad - (kKernel - 1);
    const std::size_t ow = w + 2 * pad - (kKernel - 1);
    const Shape expected{n, oh, ow, out_channels_};
    if (upstream.shape() != expected) {
      throw ShapeError("conv2d backward: upstream " + shape_to_string(upstream.shape()) +
                       " does not match forward output " + shape_to_string(expected));
    }

    const std::size_t patch_len = kKernel * kKernel * in_channels_;
    TensorT<T> input_grad(input.shape(), T{0});

    // Per-sample kernel-gradient contributions are reduced in sample order
    // afterwards, so the result is independent of the worker count.
    std::vector<std::vector<T>> kgrad_parts(n, std::vector<T>(patch_len * out_channels_, T{0}));
    parallel_for(n, [&](std::size_t b) {
      std::vector<T> patches(oh * ow * patch_len);
      im2col_sample(input, b, pad, oh, ow, patches.data());
      const T* up = upstream.data() + b * oh * ow * out_channels_;

      // dK_b = patches^T \cdot upstream_b
      std::vector<T> patches_t(patch_len * oh * ow);
      for (std::size_t r = 0; r < oh * ow; ++r)
        for (std::size_t c = 0; c < patch_len; ++c)
          patches_t[c * oh * ow + r] = patches[r * patch_len + c];
      matmul_into(kgrad_parts[b].data(), patches_t.data(), up, patch_len, oh * ow, out_channels_);

      // dPatches_b = upstream_b \cdot K^T, scattered back through col2im.
      std::vector<T> kernels_t(out_channels_ * patch_len);
      const T* kd = kernels_.data();
      for (std::size_t c = 0; c < patch_len; ++c)
        for (std::size_t o = 0; o < out_channels_; ++o)
          kernels_t[o * patch_len + c] = kd[c * out_channels_ + o];
      std::vector<T> dpatches(oh * ow * patch_len, T{0});
      matmul_into(dpatches.data(), up, kernels_t.data(), oh * ow, out_channels_, patch_len);
      col2im_sample(dpatches.data(), b, pad, oh, ow, input_grad);
    });

    T* kg = kernels_grad_.data();
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t i = 0; i < patch_len * out_channels_; ++i) kg[i] += kgrad_parts[b][i];

    // dbias = sum of upstream over batch and spatial axes.
    const T* up = upstream.data();
    for (std::size_t i = 0; i < n * oh * ow; ++i)
      for (std::size_t o = 0; o < out_channels_; ++o) bias_grad_[o] += up[i * out_channels_ + o];

    return input_grad;
  }

  LayerKind kind() const override { return LayerKind::conv; }
  std::string describe() const override {
    return "conv 3x3 " + std::to_string(in_channels_) + "->" + std::to_string(out_channels_) +
           " (" + padding_name(padding_) + ")";
  }

  std::vector<ParamSlot<T>> trainable() override {
    return {{&kernels_, &kernels_grad_, "kernels"}, {&bias_, &bias_grad_, "bias"}};
  }

  TensorT<T>& kernels() { return kernels_; }
  TensorT<T>& bias() { return bias_; }

  static constexpr std::size_t kKernel = 3;

 private:
  std::size_t pad_amount() const { return padding_ == Padding::same ? 1 : 0; }

  void im2col_sample(const TensorT<T>& input, std::size_t b, std::size_t pad, std::size_t oh,
                     std::size_t ow, T* patches) const {
    const std::size_t h = input.extent(1), w = input.extent(2), c = in_channels_;
    const T* src = input.data() + b * h * w * c;
    std::size_t write = 0;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        for (std::size_t dy = 0; dy < kKernel; ++dy) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(pad);
          for (std::size_t dx = 0; dx < kKernel; ++dx) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(pad);
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h) || sx < 0 ||
                sx >= static_cast<std::ptrdiff_t>(w)) {
              for (std::size_t ci = 0; ci < c; ++ci) patches[write++] = T{0};
            } else {
              const T* px = src + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
              for (std::size_t ci = 0; ci < c; ++ci) patches[write++] = px[ci];
            }
          }
        }
      }
    }
  }

  void col2im_sample(const T* dpatches, std::size_t b, std::size_t pad, std::size_t oh,
                     std::size_t ow, TensorT<T>& input_grad) const {
    const std::size_t h = input_grad.extent(1), w = input_grad.extent(2), c = in_channels_;
    T* dst = input_grad.data() + b * h * w * c;
    std::size_t read = 0;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        for (std::size_t dy = 0; dy < kKernel; ++dy) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(pad);
          for (std::size_t dx = 0; dx < kKernel; ++dx) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(pad);
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h) || sx < 0 ||
                sx >= static_cast<std::ptrdiff_t>(w)) {
              read += c;
            } else {
              T* px = dst + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
              for (std::size_t ci = 0; ci < c; ++ci) px[ci] += dpatches[read++];
            }
          }
        }
      }
    }
  }

  std::size_t in_channels_, out_channels_;
  Padding padding_;
  TensorT<T> kernels_, bias_;
  TensorT<T> kernels_grad_, bias_grad_;
  TensorT<T> input_cache_;
};

// ---- 2x2 max pooling -------------------------------------------------------
//
// Stride 2; a trailing odd row/column is dropped (floor semantics). The
// argmax position of each window is cached; ties keep the first occurrence
// in row-major window order, so backward routing is deterministic.
template <typename T>
class MaxPool2d final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& input, Mode, Rng&) override {
    detail::require_rank4(input, "maxpool2d");
    const std::size_t n = input.extent(0), h = input.extent(1), w = input.extent(2),
                      c = input.extent(3);
    if (h < 2 || w < 2) {
      throw ShapeError("maxpool2d: spatial input " + shape_to_string(input.shape()) +
                       " smaller than the 2x2 window");
    }
    const std::size_t oh = h / 2, ow = w / 2;
    input_shape_ = input.shape();
    TensorT<T> out({n, oh, ow, c});
    argmax_.assign(out.size(), 0);
    const T* src = input.data();
    T* dst = out.data();
    parallel_for(n, [&](std::size_t b) {
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x)
          for (std::size_t ci = 0; ci < c; ++ci) {
            std::size_t best_idx = ((b * h + 2 * y) * w + 2 * x) * c + ci;
            T best = src[best_idx];
            for (std::size_t dy = 0; dy < 2; ++dy)
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t idx = ((b * h + 2 * y + dy) * w + 2 * x + dx) * c + ci;
                if (src[idx] > best) {
                  best = src[idx];
                  best_idx = idx;
                }
              }
            const std::size_t out_idx = ((b * oh + y) * ow + x) * c + ci;
            dst[out_idx] = best;
            argmax_[out_idx] = best_idx;
          }
    });
    return out;
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    if (upstream.size() != argmax_.size()) {
      throw ShapeError("maxpool2d backward: upstream " + shape_to_string(upstream.shape()) +
                       " does not match forward output");
    }
    TensorT<T> input_grad(input_shape_, T{0});
    T* dst = input_grad.data();
    const T* up = upstream.data();
    for (std::size_t i = 0; i < upstream.size(); ++i) dst[argmax_[i]] += up[i];
    return input_grad;
  }

  LayerKind kind() const override { return LayerKind::maxpool; }
  std::string describe() const override { return "maxpool 2x2"; }

 private:
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

// ---- ReLU ------------------------------------------------------------------

template <typename T>
class ReLU final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& input, Mode, Rng&) override {
    mask_.assign(input.size(), 0);
    TensorT<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
      const bool on = input[i] > T{0};
      mask_[i] = on;
      out[i] = on ? input[i] : T{0};
    }
    input_shape_ = input.shape();
    return out;
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    if (upstream.size() != mask_.size()) {
      throw ShapeError("relu backward: upstream does not match forward input");
    }
    TensorT<T> grad(input_shape_);
    for (std::size_t i = 0; i < upstream.size(); ++i) grad[i] = mask_[i] ? upstream[i] : T{0};
    return grad;
  }

  LayerKind kind() const override { return LayerKind::relu; }
  std::string describe() const override { return "relu"; }

 private:
  Shape input_shape_;
  std::vector<std::uint8_t> mask_;
};

// ---- flatten ---------------------------------------------------------------

template <typename T>
class Flatten final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& input, Mode, Rng&) override {
    detail::require_rank4(input, "flatten");
    input_shape_ = input.shape();
    const std::size_t n = input.extent(0);
    return input.reshaped({n, input.size() / n});
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    return upstream.reshaped(input_shape_);
  }

  LayerKind kind() const override { return LayerKind::flatten; }
  std::string describe() const override { return "flatten"; }

 private:
  Shape input_shape_;
};

// ---- dense -----------------------------------------------------------------

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features)
      : in_features_(in_features),
        out_features_(out_features),
        weights_({in_features, out_features}, T{0}),
        bias_({out_features}, T{0}),
        weights_grad_(weights_.shape(), T{0}),
        bias_grad_(bias_.shape(), T{0}) {}

  void init(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_features_));
    for (std::size_t i = 0; i < weights_.size(); ++i)
      weights_[i] = static_cast<T>(rng.uniform(-bound, bound));
    fill(bias_, T{0});
  }

  TensorT<T> forward(const TensorT<T>& input, Mode, Rng&) override {
    if (input.rank() != 2 || input.extent(1) != in_features_) {
      throw ShapeError("dense: input " + shape_to_string(input.shape()) + " does not match " +
                       std::to_string(in_features_) + " input features");
    }
    input_cache_ = input;
    TensorT<T> out = matmul(input, weights_);
    const std::size_t n = input.extent(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < out_features_; ++j) out[i * out_features_ + j] += bias_[j];
    return out;
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    const std::size_t n = input_cache_.extent(0);
    if (upstream.rank() != 2 || upstream.extent(0) != n || upstream.extent(1) != out_features_) {
      throw ShapeError("dense backward: upstream " + shape_to_string(upstream.shape()) +
                       " does not match forward output");
    }
    add_in_place(weights_grad_, matmul(transposed(input_cache_), upstream));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < out_features_; ++j)
        bias_grad_[j] += upstream[i * out_features_ + j];
    return matmul(upstream, transposed(weights_));
  }

  LayerKind kind() const override { return LayerKind::dense; }
  std::string describe() const override {
    return "dense " + std::to_string(in_features_) + "->" + std::to_string(out_features_);
  }

  std::vector<ParamSlot<T>> trainable() override {
    return {{&weights_, &weights_grad_, "weights"}, {&bias_, &bias_grad_, "bias"}};
  }

  TensorT<T>& weights() { return weights_; }
  TensorT<T>& bias() { return bias_; }

 private:
  std::size_t in_features_, out_features_;
  TensorT<T> weights_, bias_;
  TensorT<T> weights_grad_, bias_grad_;
  TensorT<T> input_cache_;
};

// ---- batch normalization -----------------------------------------------------
//
// Train mode normalizes by the biased batch statistics and folds them into
// the running averages (new = momentum * old + (1 - momentum) * batch);
// infer mode normalizes by the running statistics. The backward pass keeps
// the full dependency of the batch mean and variance on the input.
template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  explicit BatchNorm(std::size_t features, T epsilon = T(1e-3), T momentum = T(0.99))
      : features_(features),
        epsilon_(epsilon),
        momentum_(momentum),
        gamma_({features}, T{1}),
        beta_({features}, T{0}),
        running_mean_({features}, T{0}),
        running_var_({features}, T{1}),
        gamma_grad_({features}, T{0}),
        beta_grad_({features}, T{0}) {
    if (!(epsilon > T{0})) throw std::invalid_argument("batchnorm: epsilon must be positive");
    if (!(momentum > T{0} && momentum < T{1}))
      throw std::invalid_argument("batchnorm: momentum must lie in (0,1)");
  }

  TensorT<T> forward(const TensorT<T>& input, Mode mode, Rng&) override {
    if (input.rank() != 2 || input.extent(1) != features_) {
      throw ShapeError("batchnorm: input " + shape_to_string(input.shape()) +
                       " does not match " + std::to_string(features_) + " features");
    }
    const std::size_t n = input.extent(0);
    mode_ = mode;
    if (mode == Mode::train && n < 2) {
      throw std::invalid_argument("batchnorm: train mode needs a batch of at least 2 samples");
    }

    normalized_ = TensorT<T>({n, features_});
    inv_std_.assign(features_, T{0});
    TensorT<T> out({n, features_});

    if (mode == Mode::train) {
      for (std::size_t j = 0; j < features_; ++j) {
        T m{0};
        for (std::size_t i = 0; i < n; ++i) m += input[i * features_ + j];
        m /= static_cast<T>(n);
        T var{0};
        for (std::size_t i = 0; i < n; ++i) {
          const T d = input[i * features_ + j] - m;
          var += d * d;
        }
        var /= static_cast<T>(n);  // biased
        const T inv = T{1} / std::sqrt(var + epsilon_);
        inv_std_[j] = inv;
        for (std::size_t i = 0; i < n; ++i) {
          const T xhat = (input[i * features_ + j] - m) * inv;
          normalized_[i * features_ + j] = xhat;
          out[i * features_ + j] = gamma_[j] * xhat + beta_[j];
        }
        running_mean_[j] = momentum_ * running_mean_[j] + (T{1} - momentum_) * m;
        running_var_[j] = momentum_ * running_var_[j] + (T{1} - momentum_) * var;
      }
    } else {
      for (std::size_t j = 0; j < features_; ++j) {
        const T inv = T{1} / std::sqrt(running_var_[j] + epsilon_);
        inv_std_[j] = inv;
        for (std::size_t i = 0; i < n; ++i) {
          const T xhat = (input[i * features_ + j] - running_mean_[j]) * inv;
          normalized_[i * features_ + j] = xhat;
          out[i * features_ + j] = gamma_[j] * xhat + beta_[j];
        }
      }
    }
    return out;
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    const std::size_t n = normalized_.extent(0);
    if (!upstream.same_shape(normalized_)) {
      throw ShapeError("batchnorm backward: upstream " + shape_to_string(upstream.shape()) +
                       " does not match forward output");
    }
    TensorT<T> input_grad({n, features_});
    for (std::size_t j = 0; j < features_; ++j) {
      T sum_dy{0}, sum_dy_xhat{0};
      for (std::size_t i = 0; i < n; ++i) {
        const T dy = upstream[i * features_ + j];
        sum_dy += dy;
        sum_dy_xhat += dy * normalized_[i * features_ + j];
      }
      gamma_grad_[j] += sum_dy_xhat;
      beta_grad_[j] += sum_dy;
      if (mode_ == Mode::train) {
        const T scale = gamma_[j] * inv_std_[j] / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const T dy = upstream[i * features_ + j];
          input_grad[i * features_ + j] =
              scale * (static_cast<T>(n) * dy - sum_dy - normalized_[i * features_ + j] * sum_dy_xhat);
        }
      } else {
        // Running statistics are constants wrt the input.
        const T scale = gamma_[j] * inv_std_[j];
        for (std::size_t i = 0; i < n; ++i)
          input_grad[i * features_ + j] = scale * upstream[i * features_ + j];
      }
    }
    return input_grad;
  }

  LayerKind kind() const override { return LayerKind::batchnorm; }
  std::string describe() const override { return "batchnorm " + std::to_string(features_); }

  std::vector<ParamSlot<T>> trainable() override {
    return {{&gamma_, &gamma_grad_, "gamma"}, {&beta_, &beta_grad_, "beta"}};
  }

  std::vector<StateSlot<T>> state() override {
    return {{&running_mean_, "running_mean"}, {&running_var_, "running_var"}};
  }

  TensorT<T>& gamma() { return gamma_; }
  TensorT<T>& beta() { return beta_; }
  TensorT<T>& running_mean() { return running_mean_; }
  TensorT<T>& running_var() { return running_var_; }

 private:
  std::size_t features_;
  T epsilon_, momentum_;
  TensorT<T> gamma_, beta_, running_mean_, running_var_;
  TensorT<T> gamma_grad_, beta_grad_;
  TensorT<T> normalized_;
  std::vector<T> inv_std_;
  Mode mode_ = Mode::infer;
};

// ---- dropout ---------------------------------------------------------------
//
// Inverted dropout: each element is zeroed with probability `rate` and
// survivors are scaled by 1/(1-rate), so inference is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(double rate) : rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw std::invalid_argument("dropout: rate must lie in [0,1), got " + std::to_string(rate));
    }
  }

  TensorT<T> forward(const TensorT<T>& input, Mode mode, Rng& rng) override {
    if (mode == Mode::infer || rate_ == 0.0) {
      active_ = false;
      return input;
    }
    active_ = true;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.assign(input.size(), T{0});
    TensorT<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (rng.uniform() >= rate_) {
        mask_[i] = keep_scale;
        out[i] = input[i] * keep_scale;
      }
    }
    return out;
  }

  TensorT<T> backward(const TensorT<T>& upstream) override {
    if (!active_) return upstream;
    if (upstream.size() != mask_.size()) {
      throw ShapeError("dropout backward: upstream does not match forward input");
    }
    TensorT<T> grad(upstream.shape());
    for (std::size_t i = 0; i < upstream.size(); ++i) grad[i] = upstream[i] * mask_[i];
    return grad;
  }

  LayerKind kind() const override { return LayerKind::dropout; }
  std::string describe() const override { return "dropout " + std::to_string(rate_); }

  double rate() const { return rate_; }
  const std::vector<T>& last_mask() const { return mask_; }

 private:
  double rate_;
  bool active_ = false;
  std::vector<T> mask_;
};

}  // namespace leafnet
