#include "leafnet/model.hpp"

#include <json.hpp>

using nlohmann::json;

namespace leafnet {

const char* layer_op_name(LayerOp op) {
  switch (op) {
    case LayerOp::conv: return "conv";
    case LayerOp::maxpool: return "maxpool";
    case LayerOp::relu: return "relu";
    case LayerOp::flatten: return "flatten";
    case LayerOp::dense: return "dense";
    case LayerOp::batchnorm: return "batchnorm";
    case LayerOp::dropout: return "dropout";
    case LayerOp::softmax: return "softmax";
  }
  return "?";
}

LayerOp parse_layer_op(const std::string& name) {
  for (LayerOp op : {LayerOp::conv, LayerOp::maxpool, LayerOp::relu, LayerOp::flatten,
                     LayerOp::dense, LayerOp::batchnorm, LayerOp::dropout, LayerOp::softmax}) {
    if (name == layer_op_name(op)) return op;
  }
  throw std::invalid_argument("unknown layer op \"" + name + "\"");
}

ModelSpec ModelSpec::leaf_cnn(std::size_t num_classes, Padding padding, std::size_t input_size,
                              std::size_t conv_blocks) {
  if (num_classes < 2) throw std::invalid_argument("leaf_cnn: need at least 2 classes");
  if (conv_blocks < 1) throw std::invalid_argument("leaf_cnn: need at least 1 conv block");
  ModelSpec spec;
  spec.input_h = spec.input_w = input_size;
  spec.input_c = 3;
  spec.num_classes = num_classes;
  spec.padding = padding;
  for (std::size_t b = 0; b < conv_blocks; ++b) {
    spec.layers.push_back(LayerDesc::conv(b == 0 ? 32 : 64));
    spec.layers.push_back(LayerDesc::relu());
    spec.layers.push_back(LayerDesc::maxpool());
  }
  spec.layers.push_back(LayerDesc::flatten());
  spec.layers.push_back(LayerDesc::dense(64));
  spec.layers.push_back(LayerDesc::relu());
  spec.layers.push_back(LayerDesc::batchnorm());
  spec.layers.push_back(LayerDesc::dropout(0.1));
  spec.layers.push_back(LayerDesc::dense(num_classes));
  spec.layers.push_back(LayerDesc::softmax());
  return spec;
}

std::vector<Shape> ModelSpec::activation_shapes() const {
  if (layers.empty()) throw ShapeError("model spec has no layers");
  std::vector<Shape> shapes;
  bool spatial = true;
  std::size_t h = input_h, w = input_w, c = input_c;
  std::size_t features = 0;
  for (const LayerDesc& d : layers) {
    switch (d.op) {
      case LayerOp::conv: {
        if (!spatial) throw ShapeError("conv after flatten");
        const std::size_t pad = padding == Padding::same ? 1 : 0;
        if (h + 2 * pad < 3 || w + 2 * pad < 3) {
          throw ShapeError("input smaller than the receptive chain allows: conv sees " +
                           std::to_string(h) + "x" + std::to_string(w));
        }
        h = h + 2 * pad - 2;
        w = w + 2 * pad - 2;
        c = d.units;
        break;
      }
      case LayerOp::maxpool:
        if (!spatial) throw ShapeError("maxpool after flatten");
        if (h < 2 || w < 2) {
          throw ShapeError("input smaller than the receptive chain allows: maxpool sees " +
                           std::to_string(h) + "x" + std::to_string(w));
        }
        h /= 2;
        w /= 2;
        break;
      case LayerOp::relu:
        break;
      case LayerOp::flatten:
        if (!spatial) throw ShapeError("flatten after flatten");
        features = h * w * c;
        spatial = false;
        break;
      case LayerOp::dense:
        if (spatial) throw ShapeError("dense before flatten");
        features = d.units;
        break;
      case LayerOp::batchnorm:
        if (spatial) throw ShapeError("batchnorm before flatten");
        break;
      case LayerOp::dropout:
      case LayerOp::softmax:
        break;
    }
    shapes.push_back(spatial ? Shape{1, h, w, c} : Shape{1, features});
  }
  if (!spatial && features != num_classes) {
    throw ShapeError("model spec ends with " + std::to_string(features) + " outputs for " +
                     std::to_string(num_classes) + " classes");
  }
  return shapes;
}

std::size_t ModelSpec::trainable_parameter_count() const {
  activation_shapes();  // validate first
  std::size_t total = 0;
  bool spatial = true;
  std::size_t h = input_h, w = input_w, c = input_c;
  std::size_t features = 0;
  for (const LayerDesc& d : layers) {
    switch (d.op) {
      case LayerOp::conv: {
        total += 3 * 3 * c * d.units + d.units;
        const std::size_t pad = padding == Padding::same ? 1 : 0;
        h = h + 2 * pad - 2;
        w = w + 2 * pad - 2;
        c = d.units;
        break;
      }
      case LayerOp::maxpool:
        h /= 2;
        w /= 2;
        break;
      case LayerOp::flatten:
        features = h * w * c;
        spatial = false;
        break;
      case LayerOp::dense:
        total += features * d.units + d.units;
        features = d.units;
        break;
      case LayerOp::batchnorm:
        total += 2 * features;  // gamma + beta
        break;
      default:
        break;
    }
  }
  (void)spatial;
  return total;
}

std::size_t ModelSpec::count(LayerOp op) const {
  std::size_t n = 0;
  for (const LayerDesc& d : layers) {
    if (d.op == op) ++n;
  }
  return n;
}

std::string ModelSpec::to_json() const {
  json j;
  j["input"] = {input_h, input_w, input_c};
  j["num_classes"] = num_classes;
  j["padding"] = padding_name(padding);
  j["bn_epsilon"] = bn_epsilon;
  j["bn_momentum"] = bn_momentum;
  json ls = json::array();
  for (const LayerDesc& d : layers) {
    json e;
    e["op"] = layer_op_name(d.op);
    if (d.op == LayerOp::conv || d.op == LayerOp::dense) e["units"] = d.units;
    if (d.op == LayerOp::dropout) e["rate"] = d.rate;
    ls.push_back(std::move(e));
  }
  j["layers"] = std::move(ls);
  return j.dump();
}

ModelSpec ModelSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model spec is not valid JSON: ") + e.what());
  }
  ModelSpec spec;
  try {
    const auto input = j.at("input");
    spec.input_h = input.at(0).get<std::size_t>();
    spec.input_w = input.at(1).get<std::size_t>();
    spec.input_c = input.at(2).get<std::size_t>();
    spec.num_classes = j.at("num_classes").get<std::size_t>();
    const std::string pad = j.at("padding").get<std::string>();
    if (pad == "valid") spec.padding = Padding::valid;
    else if (pad == "same") spec.padding = Padding::same;
    else throw std::invalid_argument("unknown padding \"" + pad + "\"");
    spec.bn_epsilon = j.at("bn_epsilon").get<double>();
    spec.bn_momentum = j.at("bn_momentum").get<double>();
    for (const auto& e : j.at("layers")) {
      LayerDesc d{parse_layer_op(e.at("op").get<std::string>()), 0, 0.0};
      if (e.contains("units")) d.units = e.at("units").get<std::size_t>();
      if (e.contains("rate")) d.rate = e.at("rate").get<double>();
      spec.layers.push_back(d);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model spec is missing fields: ") + e.what());
  }
  return spec;
}

}  // namespace leafnet
