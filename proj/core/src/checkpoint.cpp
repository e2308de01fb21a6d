#include "leafnet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace leafnet {

namespace {

template <typename U>
void write_raw(std::ostream& out, U value) {
  static_assert(std::is_trivially_copyable_v<U>);
  char buf[sizeof(U)];
  std::memcpy(buf, &value, sizeof(U));  // build targets are little-endian
  out.write(buf, sizeof(U));
}

template <typename U>
U read_raw(std::istream& in) {
  char buf[sizeof(U)];
  in.read(buf, sizeof(U));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(U))) {
    throw CheckpointError("truncated checkpoint file");
  }
  U value;
  std::memcpy(&value, buf, sizeof(U));
  return value;
}

void write_tensor(std::ostream& out, const Tensor& t) {
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d = 0; d < t.rank(); ++d)
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(t.extent(d)));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
}

Tensor read_tensor(std::istream& in) {
  const std::uint32_t rank = read_raw<std::uint32_t>(in);
  if (rank == 0 || rank > 8) throw CheckpointError("checkpoint tensor has invalid rank");
  Shape shape(rank);
  for (std::uint32_t d = 0; d < rank; ++d) {
    shape[d] = static_cast<std::size_t>(read_raw<std::uint64_t>(in));
    if (shape[d] == 0) throw CheckpointError("checkpoint tensor has zero extent");
  }
  Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(float))) {
    throw CheckpointError("truncated checkpoint file");
  }
  return t;
}

json optimizer_config_json(const OptimizerConfig& cfg) {
  return {{"family", optimizer_family_name(cfg.family)},
          {"learning_rate", cfg.learning_rate},
          {"momentum", cfg.momentum},
          {"rho", cfg.rho},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"eps", cfg.eps}};
}

OptimizerConfig optimizer_config_from_json(const json& j) {
  OptimizerConfig cfg;
  cfg.family = parse_optimizer_family(j.at("family").get<std::string>());
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.momentum = j.at("momentum").get<double>();
  cfg.rho = j.at("rho").get<double>();
  cfg.beta1 = j.at("beta1").get<double>();
  cfg.beta2 = j.at("beta2").get<double>();
  cfg.eps = j.at("eps").get<double>();
  return cfg;
}

}  // namespace

void save_checkpoint(std::ostream& out, Model<float>& model, const CheckpointMeta& meta,
                     Optimizer<float>* optimizer) {
  json header;
  header["model_spec"] = json::parse(model.spec().to_json());
  header["class_names"] = meta.class_names;
  header["epoch"] = meta.epoch;
  header["seed"] = meta.seed;
  header["rng_state"] = meta.rng_state;
  if (optimizer) {
    header["optimizer"] = optimizer_config_json(optimizer->config());
    header["optimizer"]["step_count"] = optimizer->step_count();
  }
  const std::string header_text = header.dump();

  out.write(kCheckpointMagic, 4);
  write_raw<std::uint32_t>(out, kCheckpointVersion);
  write_raw<std::uint64_t>(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  for (const auto& slot : model.trainable()) write_tensor(out, *slot.value);
  for (const auto& slot : model.state()) write_tensor(out, *slot.value);
  if (optimizer) {
    for (const Tensor* buf : optimizer->buffer_tensors()) write_tensor(out, *buf);
  }
  if (!out) throw CheckpointError("checkpoint write failed");
}

void save_checkpoint(const std::string& path, Model<float>& model, const CheckpointMeta& meta,
                     Optimizer<float>* optimizer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  save_checkpoint(out, model, meta, optimizer);
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4) throw CheckpointError("truncated checkpoint file");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CheckpointError("bad checkpoint magic (not an LFNT file)");
  }
  const std::uint32_t version = read_raw<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t header_len = read_raw<std::uint64_t>(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (in.gcount() != static_cast<std::streamsize>(header_len)) {
    throw CheckpointError("truncated checkpoint file");
  }

  Checkpoint ckpt;
  json header;
  try {
    header = json::parse(header_text);
    ckpt.spec = ModelSpec::from_json(header.at("model_spec").dump());
    ckpt.meta.class_names = header.at("class_names").get<std::vector<std::string>>();
    ckpt.meta.epoch = header.at("epoch").get<std::uint64_t>();
    ckpt.meta.seed = header.at("seed").get<std::uint64_t>();
    ckpt.meta.rng_state = header.at("rng_state").get<std::string>();
    if (header.contains("optimizer")) {
      ckpt.has_optimizer = true;
      ckpt.optimizer_config = optimizer_config_from_json(header.at("optimizer"));
      ckpt.optimizer_step_count = header.at("optimizer").at("step_count").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (ckpt.meta.class_names.size() != ckpt.spec.num_classes) {
    throw CheckpointError("checkpoint class names do not match the model spec");
  }

  // Tensor counts are dictated by the spec, so a fresh model tells us how
  // many payloads to expect.
  Model<float> probe(ckpt.spec, 0);
  const std::size_t n_params = probe.trainable().size();
  const std::size_t n_state = probe.state().size();
  for (std::size_t i = 0; i < n_params; ++i) ckpt.params.push_back(read_tensor(in));
  for (std::size_t i = 0; i < n_state; ++i) ckpt.state.push_back(read_tensor(in));
  if (ckpt.has_optimizer) {
    Optimizer<float> probe_opt(ckpt.optimizer_config);
    const std::size_t per_param = probe_opt.buffers_per_param();
    for (std::size_t i = 0; i < n_params * per_param; ++i)
      ckpt.optimizer_buffers.push_back(read_tensor(in));
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint: " + path);
  return load_checkpoint(in);
}

Model<float> Checkpoint::build_model() const {
  Model<float> model(spec, 0);
  load_into(model);
  return model;
}

void Checkpoint::load_into(Model<float>& model) const {
  if (!(model.spec() == spec)) {
    throw CheckpointError("checkpoint model spec does not match the target model");
  }
  auto slots = model.trainable();
  if (slots.size() != params.size()) {
    throw CheckpointError("checkpoint parameter count does not match the model");
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].value->same_shape(params[i])) {
      throw CheckpointError("checkpoint tensor shape mismatch at " + slots[i].name);
    }
    *slots[i].value = params[i];
  }
  auto state_slots = model.state();
  if (state_slots.size() != state.size()) {
    throw CheckpointError("checkpoint state count does not match the model");
  }
  for (std::size_t i = 0; i < state_slots.size(); ++i) {
    if (!state_slots[i].value->same_shape(state[i])) {
      throw CheckpointError("checkpoint tensor shape mismatch at " + state_slots[i].name);
    }
    *state_slots[i].value = state[i];
  }
}

Optimizer<float> Checkpoint::build_optimizer(Model<float>& model) const {
  if (!has_optimizer) throw CheckpointError("checkpoint carries no optimizer state");
  Optimizer<float> opt(optimizer_config);
  auto slots = model.trainable();
  opt.bind(slots);
  auto buffers = opt.buffer_tensors();
  if (buffers.size() != optimizer_buffers.size()) {
    throw CheckpointError("checkpoint optimizer buffer count does not match the model");
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    if (!buffers[i]->same_shape(optimizer_buffers[i])) {
      throw CheckpointError("checkpoint optimizer buffer shape mismatch");
    }
    *buffers[i] = optimizer_buffers[i];
  }
  opt.set_step_count(optimizer_step_count);
  return opt;
}

}  // namespace leafnet
