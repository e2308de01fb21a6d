#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "leafnet/model.hpp"
#include "leafnet/optim.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary checkpoint, little-endian:
//   magic "LFNT" | u32 version | u64 header length | header JSON
//   then one payload per tensor, in declaration order:
//   u32 rank | u64 extent per axis | float32 values
// Payload order: trainable parameters, then BN running statistics, then
// optimizer buffers when present. The header JSON carries the model spec,
// class names, epoch, seed, dropout-rng state, and the optimizer config.
struct CheckpointMeta {
  std::vector<std::string> class_names;
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;
  std::string rng_state;  // serialized dropout stream; empty when not training
};

struct Checkpoint {
  ModelSpec spec;
  CheckpointMeta meta;
  bool has_optimizer = false;
  OptimizerConfig optimizer_config;
  std::uint64_t optimizer_step_count = 0;
  std::vector<Tensor> params;
  std::vector<Tensor> state;
  std::vector<Tensor> optimizer_buffers;

  // Rebuilds the model with the stored parameters and running statistics.
  Model<float> build_model() const;

  // Copies tensors into an existing model; the specs must match exactly.
  void load_into(Model<float>& model) const;

  // Restores the optimizer (buffers + step count) bound to `model`'s
  // parameters. Only valid when has_optimizer is set.
  Optimizer<float> build_optimizer(Model<float>& model) const;
};

void save_checkpoint(std::ostream& out, Model<float>& model, const CheckpointMeta& meta,
                     Optimizer<float>* optimizer = nullptr);
void save_checkpoint(const std::string& path, Model<float>& model, const CheckpointMeta& meta,
                     Optimizer<float>* optimizer = nullptr);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

inline constexpr char kCheckpointMagic[4] = {'L', 'F', 'N', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace leafnet
