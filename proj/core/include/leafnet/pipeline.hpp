#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <thread>
#include <vector>

#include "leafnet/image_io.hpp"
#include "leafnet/manifest.hpp"
#include "leafnet/parallel.hpp"
#include "leafnet/rng.hpp"
#include "leafnet/tensor.hpp"
#include "leafnet/transforms.hpp"

namespace leafnet {

template <typename T>
struct BatchT {
  TensorT<T> images;  // [b, h, w, 3], values in [0, 1]
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

using Batch = BatchT<float>;

// Random-access view over one split of a dataset. load() must be safe to
// call from a worker thread and must depend only on the requested indices.
template <typename T>
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual BatchT<T> load(std::span<const std::size_t> indices) const = 0;
};

// Decodes manifest records on demand: decode -> resize to the model input
// size -> provenance transform -> rescale to [0,1]. Distinct records are
// decoded in parallel; results are position-stable so parallelism never
// changes batch contents.
template <typename T>
class ManifestBatchSource final : public BatchSource<T> {
 public:
  ManifestBatchSource(const DatasetManifest& manifest, Split split, std::size_t image_size = 256,
                      AugmentOptions augment = {})
      : manifest_(&manifest),
        indices_(manifest.indices_of(split)),
        image_size_(image_size),
        augment_(augment) {
    if (indices_.empty()) {
      throw ManifestError(std::string("split \"") + split_name(split) + "\" is empty");
    }
  }

  std::size_t size() const override { return indices_.size(); }
  std::size_t num_classes() const override { return manifest_->class_names.size(); }

  BatchT<T> load(std::span<const std::size_t> indices) const override {
    BatchT<T> batch;
    batch.images = TensorT<T>({indices.size(), image_size_, image_size_, 3});
    batch.labels.resize(indices.size());
    const std::size_t stride = image_size_ * image_size_ * 3;
    parallel_for(indices.size(), [&](std::size_t i) {
      const ImageRecord& rec = manifest_->records[indices_[indices[i]]];
      TensorT<T> img = prepare(rec);
      std::copy(img.data(), img.data() + stride, batch.images.data() + i * stride);
      batch.labels[i] = rec.label;
    });
    return batch;
  }

  // decode + resize + provenance transform, still in the [0,255] domain.
  TensorT<T> prepare_pixels(const ImageRecord& rec) const {
    TensorT<T> img = decode_image(rec.path).template cast<T>();
    img = resize_bilinear(img, image_size_, image_size_);
    switch (rec.provenance) {
      case Provenance::original: break;
      case Provenance::flip_h: img = flip_horizontal(img); break;
      case Provenance::flip_v: img = flip_vertical(img); break;
      case Provenance::zoom: img = center_zoom(img, augment_.zoom_fraction); break;
      case Provenance::rotate: img = rotate_ccw(img, augment_.rotate_degrees); break;
    }
    return img;
  }

 private:
  TensorT<T> prepare(const ImageRecord& rec) const { return rescale_to_unit(prepare_pixels(rec)); }

  const DatasetManifest* manifest_;
  std::vector<std::size_t> indices_;
  std::size_t image_size_;
  AugmentOptions augment_;
};

// In-memory dataset for synthetic experiments and tests.
template <typename T>
class InMemoryBatchSource final : public BatchSource<T> {
 public:
  // images: [n, h, w, c] already scaled to [0,1]
  InMemoryBatchSource(TensorT<T> images, std::vector<int> labels, std::size_t num_classes)
      : images_(std::move(images)), labels_(std::move(labels)), num_classes_(num_classes) {
    if (images_.rank() != 4 || images_.extent(0) != labels_.size()) {
      throw ShapeError("in-memory source: images/labels disagree");
    }
  }

  std::size_t size() const override { return labels_.size(); }
  std::size_t num_classes() const override { return num_classes_; }

  BatchT<T> load(std::span<const std::size_t> indices) const override {
    const std::size_t stride = images_.size() / images_.extent(0);
    BatchT<T> batch;
    batch.images = TensorT<T>({indices.size(), images_.extent(1), images_.extent(2), images_.extent(3)});
    batch.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      std::copy(images_.data() + indices[i] * stride, images_.data() + (indices[i] + 1) * stride,
                batch.images.data() + i * stride);
      batch.labels[i] = labels_[indices[i]];
    }
    return batch;
  }

 private:
  TensorT<T> images_;
  std::vector<int> labels_;
  std::size_t num_classes_;
};

// Index partitions for one epoch. The train split is reshuffled each epoch
// from a seed derived from (shuffle_seed, epoch); val/test order is fixed.
// The last partial batch is kept.
inline std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                          bool shuffle, std::uint64_t shuffle_seed,
                                                          std::uint64_t epoch) {
  if (n == 0) throw std::invalid_argument("make_batches: empty split");
  if (batch_size == 0) throw std::invalid_argument("make_batches: batch size must be >= 1");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    Rng rng(Rng::mix(shuffle_seed, epoch));
    rng.shuffle(order.begin(), order.end());
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

// Bounded producer: one worker loads batches in order into a queue of
// capacity 2, overlapping decode with the consumer's compute. Batch order is
// the partition order, so prefetching never changes results.
template <typename T>
class BatchPrefetcher {
 public:
  BatchPrefetcher(const BatchSource<T>& source, std::vector<std::vector<std::size_t>> partitions)
      : source_(&source), partitions_(std::move(partitions)) {
    worker_ = std::thread([this] { run(); });
  }

  ~BatchPrefetcher() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      cancelled_ = true;
    }
    space_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  BatchPrefetcher(const BatchPrefetcher&) = delete;
  BatchPrefetcher& operator=(const BatchPrefetcher&) = delete;

  std::size_t batch_count() const { return partitions_.size(); }

  // Blocks until the next batch is ready; std::nullopt once exhausted.
  // Rethrows any producer-side failure (e.g. a decode error).
  std::optional<BatchT<T>> next() {
    std::unique_lock<std::mutex> lock(mutex_);
    ready_.wait(lock, [this] { return !queue_.empty() || done_ || error_; });
    if (error_ && queue_.empty()) std::rethrow_exception(error_);
    if (queue_.empty()) return std::nullopt;
    BatchT<T> batch = std::move(queue_.front());
    queue_.pop();
    lock.unlock();
    space_.notify_one();
    return batch;
  }

 private:
  void run() {
    try {
      for (const auto& part : partitions_) {
        BatchT<T> batch = source_->load(part);
        std::unique_lock<std::mutex> lock(mutex_);
        space_.wait(lock, [this] { return queue_.size() < kCapacity || cancelled_; });
        if (cancelled_) return;
        queue_.push(std::move(batch));
        lock.unlock();
        ready_.notify_one();
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      error_ = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      done_ = true;
    }
    ready_.notify_all();
  }

  static constexpr std::size_t kCapacity = 2;

  const BatchSource<T>* source_;
  std::vector<std::vector<std::size_t>> partitions_;
  std::thread worker_;
  std::mutex mutex_;
  std::condition_variable ready_, space_;
  std::queue<BatchT<T>> queue_;
  bool done_ = false;
  bool cancelled_ = false;
  std::exception_ptr error_;
};

}  // namespace leafnet
