#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leafnet/layers.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet {

enum class OptimizerFamily { sgd_momentum, rmsprop, adam };

inline const char* optimizer_family_name(OptimizerFamily f) {
  switch (f) {
    case OptimizerFamily::sgd_momentum: return "sgd-momentum";
    case OptimizerFamily::rmsprop: return "rmsprop";
    case OptimizerFamily::adam: return "adam";
  }
  return "?";
}

inline OptimizerFamily parse_optimizer_family(const std::string& name) {
  if (name == "sgd-momentum") return OptimizerFamily::sgd_momentum;
  if (name == "rmsprop") return OptimizerFamily::rmsprop;
  if (name == "adam") return OptimizerFamily::adam;
  throw std::invalid_argument("unknown optimizer \"" + name +
                              "\" (valid: sgd-momentum, rmsprop, adam)");
}

struct OptimizerConfig {
  OptimizerFamily family = OptimizerFamily::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // sgd velocity decay
  double rho = 0.9;       // rmsprop square-average decay
  double beta1 = 0.9;     // adam first moment
  double beta2 = 0.999;   // adam second moment
  double eps = 1e-7;

  void validate() const {
    if (!(learning_rate > 0)) throw std::invalid_argument("optimizer: learning_rate must be > 0");
    if (!(eps > 0)) throw std::invalid_argument("optimizer: eps must be > 0");
    for (double d : {momentum, rho, beta1, beta2}) {
      if (!(d >= 0 && d < 1)) throw std::invalid_argument("optimizer: decay constants must lie in [0,1)");
    }
  }
};

// Applies one of the three update rules to a fixed set of parameters.
// Buffers are allocated lazily on the first step and afterwards pinned to the
// registered shapes; the step counter advances exactly once per step() call.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const OptimizerConfig& config() const { return cfg_; }
  std::uint64_t step_count() const { return step_count_; }

  // sgd:     v <- mu*v + g;               w <- w - lr*v
  // rmsprop: s <- rho*s + (1-rho)*g^2;    w <- w - lr*g/(sqrt(s) + eps)
  // adam:    m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
  //          mhat = m/(1-b1^t); vhat = v/(1-b2^t);
  //          w <- w - lr*mhat/(sqrt(vhat) + eps)
  void step(std::span<ParamSlot<T>> params) {
    ensure_buffers(params);
    ++step_count_;
    const T lr = static_cast<T>(cfg_.learning_rate);
    const T eps = static_cast<T>(cfg_.eps);
    for (std::size_t p = 0; p < params.size(); ++p) {
      TensorT<T>& w = *params[p].value;
      const TensorT<T>& g = *params[p].grad;
      if (!w.same_shape(g)) {
        throw ShapeError("optimizer: gradient shape " + shape_to_string(g.shape()) +
                         " does not match parameter " + shape_to_string(w.shape()));
      }
      if (!g.all_finite()) {
        throw std::runtime_error("optimizer: non-finite gradient in parameter \"" +
                                 params[p].name + "\"");
      }
      switch (cfg_.family) {
        case OptimizerFamily::sgd_momentum: {
          const T mu = static_cast<T>(cfg_.momentum);
          TensorT<T>& v = slots_[p][0];
          for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = mu * v[i] + g[i];
            w[i] -= lr * v[i];
          }
          break;
        }
        case OptimizerFamily::rmsprop: {
          const T rho = static_cast<T>(cfg_.rho);
          TensorT<T>& s = slots_[p][0];
          for (std::size_t i = 0; i < w.size(); ++i) {
            s[i] = rho * s[i] + (T{1} - rho) * g[i] * g[i];
            w[i] -= lr * g[i] / (std::sqrt(s[i]) + eps);
          }
          break;
        }
        case OptimizerFamily::adam: {
          const T b1 = static_cast<T>(cfg_.beta1);
          const T b2 = static_cast<T>(cfg_.beta2);
          const T bc1 = T{1} - static_cast<T>(std::pow(cfg_.beta1, static_cast<double>(step_count_)));
          const T bc2 = T{1} - static_cast<T>(std::pow(cfg_.beta2, static_cast<double>(step_count_)));
          TensorT<T>& m = slots_[p][0];
          TensorT<T>& v = slots_[p][1];
          for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (T{1} - b1) * g[i];
            v[i] = b2 * v[i] + (T{1} - b2) * g[i] * g[i];
            const T mhat = m[i] / bc1;
            const T vhat = v[i] / bc2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
          }
          break;
        }
      }
    }
  }

  // Buffer tensors in (parameter, slot) order; used by the checkpoint writer.
  // One slot per parameter for sgd/rmsprop, two (m, v) for adam.
  std::vector<TensorT<T>*> buffer_tensors() {
    std::vector<TensorT<T>*> out;
    for (auto& per_param : slots_)
      for (auto& buf : per_param) out.push_back(&buf);
    return out;
  }

  std::size_t buffers_per_param() const { return cfg_.family == OptimizerFamily::adam ? 2 : 1; }

  // Pre-allocates buffers so a freshly restored optimizer can expose them.
  void bind(std::span<ParamSlot<T>> params) { ensure_buffers(params); }

  void set_step_count(std::uint64_t t) { step_count_ = t; }

 private:
  void ensure_buffers(std::span<ParamSlot<T>> params) {
    if (!slots_.empty()) {
      if (slots_.size() != params.size()) {
        throw ShapeError("optimizer: parameter count changed between steps");
      }
      return;
    }
    slots_.reserve(params.size());
    for (const auto& slot : params) {
      std::vector<TensorT<T>> bufs;
      for (std::size_t k = 0; k < buffers_per_param(); ++k)
        bufs.emplace_back(slot.value->shape(), T{0});
      slots_.push_back(std::move(bufs));
    }
  }

  OptimizerConfig cfg_;
  std::uint64_t step_count_ = 0;
  std::vector<std::vector<TensorT<T>>> slots_;
};

}  // namespace leafnet
