#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "leafnet/layers.hpp"
#include "leafnet/loss.hpp"
#include "leafnet/rng.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet {

enum class LayerOp { conv, maxpool, relu, flatten, dense, batchnorm, dropout, softmax };

const char* layer_op_name(LayerOp op);
LayerOp parse_layer_op(const std::string& name);

struct LayerDesc {
  LayerOp op;
  std::size_t units = 0;  // conv filters / dense units
  double rate = 0.0;      // dropout rate

  bool operator==(const LayerDesc&) const = default;

  static LayerDesc conv(std::size_t filters) { return {LayerOp::conv, filters, 0.0}; }
  static LayerDesc maxpool() { return {LayerOp::maxpool, 0, 0.0}; }
  static LayerDesc relu() { return {LayerOp::relu, 0, 0.0}; }
  static LayerDesc flatten() { return {LayerOp::flatten, 0, 0.0}; }
  static LayerDesc dense(std::size_t units) { return {LayerOp::dense, units, 0.0}; }
  static LayerDesc batchnorm() { return {LayerOp::batchnorm, 0, 0.0}; }
  static LayerDesc dropout(double rate) { return {LayerOp::dropout, 0, rate}; }
  static LayerDesc softmax() { return {LayerOp::softmax, 0, 0.0}; }
};

// Ordered layer stack plus input geometry. Reduced-depth variants (fewer
// conv/pool pairs, smaller input) are first-class, so desk-scale experiments
// and gradient checks stay cheap.
struct ModelSpec {
  std::size_t input_h = 256;
  std::size_t input_w = 256;
  std::size_t input_c = 3;
  std::size_t num_classes = 2;
  Padding padding = Padding::valid;
  double bn_epsilon = 1e-3;
  double bn_momentum = 0.99;
  std::vector<LayerDesc> layers;

  bool operator==(const ModelSpec&) const = default;

  // The six-block classifier: conv 32 then five conv 64, each conv followed
  // by ReLU and a 2x2 max-pool; flatten; dense 64 + ReLU; batchnorm;
  // dropout 0.1; dense num_classes; softmax.
  static ModelSpec leaf_cnn(std::size_t num_classes, Padding padding = Padding::valid,
                            std::size_t input_size = 256, std::size_t conv_blocks = 6);

  // Output shape of every layer for batch size 1, in layer order. Throws
  // ShapeError when the input is smaller than the receptive chain allows.
  std::vector<Shape> activation_shapes() const;

  std::size_t trainable_parameter_count() const;
  std::size_t count(LayerOp op) const;

  std::string to_json() const;
  static ModelSpec from_json(const std::string& text);
};

// Instantiated network. Owns its layer parameters and per-layer caches, so a
// model belongs to exactly one training run at a time.
template <typename T>
class Model {
 public:
  Model(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
    spec_.activation_shapes();  // validates geometry up front
    Rng rng(init_seed);
    std::size_t features = 0;  // tracked flat width after flatten
    std::size_t channels = spec_.input_c;
    std::vector<Shape> shapes = spec_.activation_shapes();
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const LayerDesc& d = spec_.layers[i];
      switch (d.op) {
        case LayerOp::conv: {
          auto layer = std::make_unique<Conv2d<T>>(channels, d.units, spec_.padding);
          layer->init(rng);
          channels = d.units;
          layers_.push_back(std::move(layer));
          break;
        }
        case LayerOp::maxpool:
          layers_.push_back(std::make_unique<MaxPool2d<T>>());
          break;
        case LayerOp::relu:
          layers_.push_back(std::make_unique<ReLU<T>>());
          break;
        case LayerOp::flatten:
          features = shapes[i][1];
          layers_.push_back(std::make_unique<Flatten<T>>());
          break;
        case LayerOp::dense: {
          auto layer = std::make_unique<Dense<T>>(features, d.units);
          layer->init(rng);
          features = d.units;
          layers_.push_back(std::move(layer));
          break;
        }
        case LayerOp::batchnorm:
          layers_.push_back(std::make_unique<BatchNorm<T>>(features, static_cast<T>(spec_.bn_epsilon),
                                                           static_cast<T>(spec_.bn_momentum)));
          break;
        case LayerOp::dropout:
          layers_.push_back(std::make_unique<Dropout<T>>(d.rate));
          break;
        case LayerOp::softmax:
          break;  // applied by forward(); not a stateful layer
      }
    }
  }

  const ModelSpec& spec() const { return spec_; }

  // Pre-softmax class scores [n, num_classes].
  TensorT<T> logits(const TensorT<T>& input, Mode mode, Rng& rng) {
    if (input.rank() != 4 || input.extent(1) != spec_.input_h || input.extent(2) != spec_.input_w ||
        input.extent(3) != spec_.input_c) {
      throw ShapeError("model: input " + shape_to_string(input.shape()) + " does not match [n," +
                       std::to_string(spec_.input_h) + "," + std::to_string(spec_.input_w) + "," +
                       std::to_string(spec_.input_c) + "]");
    }
    TensorT<T> x = input;
    for (auto& layer : layers_) x = layer->forward(x, mode, rng);
    return x;
  }

  // Class probabilities; rows sum to 1.
  TensorT<T> forward(const TensorT<T>& input, Mode mode, Rng& rng) {
    return softmax(logits(input, mode, rng));
  }

  // Backpropagates a gradient wrt the logits through every layer and
  // accumulates parameter gradients; returns the gradient wrt the input.
  TensorT<T> backward(const TensorT<T>& logits_grad) {
    TensorT<T> g = logits_grad;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  void zero_grad() {
    for (auto& layer : layers_) layer->zero_grad();
  }

  std::vector<ParamSlot<T>> trainable() {
    std::vector<ParamSlot<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      for (auto slot : layers_[i]->trainable()) {
        slot.name = "layer" + std::to_string(i) + "." + slot.name;
        out.push_back(slot);
      }
    }
    return out;
  }

  std::vector<StateSlot<T>> state() {
    std::vector<StateSlot<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      for (auto slot : layers_[i]->state()) {
        slot.name = "layer" + std::to_string(i) + "." + slot.name;
        out.push_back(slot);
      }
    }
    return out;
  }

  std::span<const std::unique_ptr<Layer<T>>> layers() const { return layers_; }
  std::span<std::unique_ptr<Layer<T>>> layers() { return layers_; }

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace leafnet
