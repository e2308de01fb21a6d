#pragma once

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "leafnet/checkpoint.hpp"
#include "leafnet/epoch_log.hpp"
#include "leafnet/image_io.hpp"
#include "leafnet/loss.hpp"
#include "leafnet/metrics.hpp"
#include "leafnet/model.hpp"
#include "leafnet/optim.hpp"
#include "leafnet/pipeline.hpp"
#include "leafnet/transforms.hpp"

namespace leafnet {

enum class PrecisionMode { f32, f64 };

struct TrainingConfig {
  OptimizerConfig optimizer;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 1;  // total target; resuming continues toward it
  std::uint64_t seed = 0;
  PrecisionMode precision = PrecisionMode::f32;
  bool track_best_validation = true;

  void validate() const {
    optimizer.validate();
    if (max_epochs < 1) throw std::invalid_argument("training: max_epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("training: batch_size must be >= 1");
  }
};

struct TrainOutcome {
  std::vector<EpochMetrics> history;
  std::string best_checkpoint;  // serialized checkpoint bytes; empty when tracking is off
  std::uint64_t best_epoch = 0;
  double best_val_accuracy = -1.0;
};

struct EvalResult {
  double loss = 0.0;
  MetricsReport report;
  ConfusionMatrix confusion;
};

// Infer-mode pass over a split (BN running stats, dropout identity):
// mean loss plus the four-metric report and the confusion tally. Results are
// independent of the batch size.
template <typename T>
EvalResult evaluate(Model<T>& model, const BatchSource<T>& source,
                    const std::vector<std::string>& class_names, std::size_t batch_size = 32,
                    Averaging averaging = Averaging::macro) {
  if (source.num_classes() != model.spec().num_classes ||
      class_names.size() != model.spec().num_classes) {
    throw std::invalid_argument("evaluate: dataset class count does not match the model");
  }
  Rng unused(0);
  ConfusionMatrix cm(class_names.size(), class_names);
  double loss_sum = 0.0;
  std::size_t seen = 0;
  BatchPrefetcher<T> feed(source, make_batches(source.size(), batch_size, false, 0, 0));
  while (auto batch = feed.next()) {
    TensorT<T> probs = model.forward(batch->images, Mode::infer, unused);
    LossResult<T> loss = cross_entropy<T>(probs, batch->labels);
    loss_sum += static_cast<double>(loss.loss) * static_cast<double>(batch->size());
    const auto predicted = argmax(probs, 1);
    for (std::size_t i = 0; i < batch->size(); ++i) {
      cm.add(batch->labels[i], static_cast<int>(predicted[i]));
    }
    seen += batch->size();
  }
  return {loss_sum / static_cast<double>(seen), compute_metrics(cm, averaging), std::move(cm)};
}

namespace detail {

template <typename Dst, typename Src>
void copy_model_params(Model<Dst>& dst, Model<Src>& src) {
  auto d = dst.trainable();
  auto s = src.trainable();
  for (std::size_t i = 0; i < d.size(); ++i) *d[i].value = s[i].value->template cast<Dst>();
  auto ds = dst.state();
  auto ss = src.state();
  for (std::size_t i = 0; i < ds.size(); ++i) *ds[i].value = ss[i].value->template cast<Dst>();
}

}  // namespace detail

// Runs the epoch loop: shuffled train batches (forward, loss, backward,
// optimizer step, BN and dropout in train mode), then the validation split in
// infer mode. Deterministic given (seed, config, data): the per-epoch shuffle
// seed is derived from (seed, epoch) and dropout draws from a dedicated
// stream, so prefetch parallelism never changes results.
template <typename T>
class Trainer {
 public:
  Trainer(Model<T>& model, TrainingConfig cfg, std::vector<std::string> class_names)
      : model_(&model),
        cfg_(cfg),
        class_names_(std::move(class_names)),
        optimizer_(cfg.optimizer),
        dropout_rng_(Rng::mix(cfg.seed, 0x1eafu)) {
    cfg_.validate();
    if (class_names_.size() != model.spec().num_classes) {
      throw std::invalid_argument("trainer: class name count does not match the model");
    }
  }

  // Continues from a saved state: parameters, running statistics, optimizer
  // buffers, epoch index, and the dropout stream. A resumed run replays the
  // exact metric sequence of an uninterrupted one.
  void restore(const Checkpoint& ckpt) {
    if (!(model_->spec() == ckpt.spec)) {
      throw CheckpointError("checkpoint model spec does not match the target model");
    }
    auto slots = model_->trainable();
    if (slots.size() != ckpt.params.size()) {
      throw CheckpointError("checkpoint parameter count does not match the model");
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].value->shape() != ckpt.params[i].shape()) {
        throw CheckpointError("checkpoint tensor shape mismatch at " + slots[i].name);
      }
      *slots[i].value = ckpt.params[i].template cast<T>();
    }
    auto state_slots = model_->state();
    if (state_slots.size() != ckpt.state.size()) {
      throw CheckpointError("checkpoint state count does not match the model");
    }
    for (std::size_t i = 0; i < state_slots.size(); ++i) {
      *state_slots[i].value = ckpt.state[i].template cast<T>();
    }
    if (ckpt.has_optimizer) {
      optimizer_ = Optimizer<T>(ckpt.optimizer_config);
      optimizer_.bind(slots);
      auto buffers = optimizer_.buffer_tensors();
      if (buffers.size() != ckpt.optimizer_buffers.size()) {
        throw CheckpointError("checkpoint optimizer buffer count does not match the model");
      }
      for (std::size_t i = 0; i < buffers.size(); ++i) {
        *buffers[i] = ckpt.optimizer_buffers[i].template cast<T>();
      }
      optimizer_.set_step_count(ckpt.optimizer_step_count);
    }
    epochs_done_ = ckpt.meta.epoch;
    if (!ckpt.meta.rng_state.empty()) dropout_rng_.restore(ckpt.meta.rng_state);
  }

  // Optional per-epoch observer (progress printing).
  std::function<void(const EpochMetrics&)> on_epoch;

  TrainOutcome fit(const BatchSource<T>& train, const BatchSource<T>& val) {
    if (train.num_classes() != model_->spec().num_classes ||
        val.num_classes() != model_->spec().num_classes) {
      throw std::invalid_argument("trainer: dataset class count does not match the model");
    }
    TrainOutcome outcome;
    Rng eval_rng(0);  // infer mode never draws from it
    while (epochs_done_ < cfg_.max_epochs) {
      const std::uint64_t epoch = epochs_done_ + 1;
      const auto t0 = std::chrono::steady_clock::now();

      double loss_sum = 0.0;
      std::size_t correct = 0, seen = 0, batch_index = 0;
      BatchPrefetcher<T> feed(train, make_batches(train.size(), cfg_.batch_size, true, cfg_.seed, epoch));
      while (auto batch = feed.next()) {
        ++batch_index;
        TensorT<T> logit_rows = model_->logits(batch->images, Mode::train, dropout_rng_);
        TensorT<T> probs = softmax(logit_rows);
        LossResult<T> loss = cross_entropy<T>(probs, batch->labels);
        if (!std::isfinite(static_cast<double>(loss.loss))) {
          throw std::runtime_error("non-finite training loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
        }
        model_->zero_grad();
        model_->backward(loss.logits_grad);
        auto params = model_->trainable();
        optimizer_.step(params);

        loss_sum += static_cast<double>(loss.loss) * static_cast<double>(batch->size());
        const auto predicted = argmax(probs, 1);
        for (std::size_t i = 0; i < batch->size(); ++i) {
          if (static_cast<int>(predicted[i]) == batch->labels[i]) ++correct;
        }
        seen += batch->size();
      }

      EvalResult val_result = evaluate(*model_, val, class_names_, cfg_.batch_size);
      EpochMetrics row;
      row.epoch = epoch;
      row.train_loss = loss_sum / static_cast<double>(seen);
      row.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
      row.val_loss = val_result.loss;
      row.val_accuracy = val_result.report.accuracy;
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      epochs_done_ = epoch;
      outcome.history.push_back(row);
      if (on_epoch) on_epoch(row);

      if (cfg_.track_best_validation && row.val_accuracy > outcome.best_val_accuracy) {
        outcome.best_val_accuracy = row.val_accuracy;
        outcome.best_epoch = epoch;
        outcome.best_checkpoint = serialize_state();
      }
    }
    return outcome;
  }

  // Serialized checkpoint of the current state (params, running stats,
  // optimizer, epoch, dropout stream). Always stored as 32-bit tensors.
  std::string serialize_state() {
    CheckpointMeta meta;
    meta.class_names = class_names_;
    meta.epoch = epochs_done_;
    meta.seed = cfg_.seed;
    meta.rng_state = dropout_rng_.serialize();
    std::ostringstream out(std::ios::binary);
    if constexpr (std::is_same_v<T, float>) {
      save_checkpoint(out, *model_, meta, &optimizer_);
    } else {
      Model<float> narrowed(model_->spec(), 0);
      detail::copy_model_params(narrowed, *model_);
      Optimizer<float> nopt(cfg_.optimizer);
      auto nslots = narrowed.trainable();
      nopt.bind(nslots);
      auto nbuf = nopt.buffer_tensors();
      auto buf = optimizer_.buffer_tensors();
      for (std::size_t i = 0; i < buf.size() && i < nbuf.size(); ++i) {
        *nbuf[i] = buf[i]->template cast<float>();
      }
      nopt.set_step_count(optimizer_.step_count());
      save_checkpoint(out, narrowed, meta, &nopt);
    }
    return out.str();
  }

  std::uint64_t epochs_done() const { return epochs_done_; }
  Optimizer<T>& optimizer() { return optimizer_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  Model<T>* model_;
  TrainingConfig cfg_;
  std::vector<std::string> class_names_;
  Optimizer<T> optimizer_;
  Rng dropout_rng_;
  std::uint64_t epochs_done_ = 0;
};

// Full preprocessing followed by an infer-mode forward pass; classes ranked
// by descending probability (ties keep the lower class index first).
struct Prediction {
  std::string class_name;
  double probability;
};

template <typename T>
std::vector<Prediction> predict(Model<T>& model, const std::vector<std::string>& class_names,
                                const std::string& image_path) {
  if (class_names.size() != model.spec().num_classes) {
    throw std::invalid_argument("predict: class name count does not match the model");
  }
  TensorT<T> img = decode_image(image_path).template cast<T>();
  img = resize_bilinear(img, model.spec().input_h, model.spec().input_w);
  img = rescale_to_unit(img);
  TensorT<T> batch = img.reshaped({1, model.spec().input_h, model.spec().input_w, model.spec().input_c});
  Rng unused(0);
  TensorT<T> probs = model.forward(batch, Mode::infer, unused);
  std::vector<std::size_t> order(class_names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<Prediction> out;
  for (std::size_t i : order) out.push_back({class_names[i], static_cast<double>(probs[i])});
  return out;
}

}  // namespace leafnet
