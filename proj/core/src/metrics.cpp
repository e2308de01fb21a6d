#include "leafnet/metrics.hpp"

#include <cstdio>

namespace leafnet {

namespace {

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string MetricsReport::csv_row(const std::string& dataset, const std::string& split) const {
  return dataset + "," + split + "," + format6(accuracy) + "," + format6(precision) + "," +
         format6(recall) + "," + format6(f1);
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes, std::vector<std::string> class_names)
    : num_classes_(num_classes),
      class_names_(std::move(class_names)),
      counts_(num_classes * num_classes, 0) {
  if (num_classes_ == 0) throw std::invalid_argument("confusion matrix needs at least one class");
  if (class_names_.empty()) {
    for (std::size_t i = 0; i < num_classes_; ++i) class_names_.push_back("class_" + std::to_string(i));
  }
  if (class_names_.size() != num_classes_) {
    throw std::invalid_argument("confusion matrix: class name count does not match class count");
  }
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || static_cast<std::size_t>(truth) >= num_classes_ || predicted < 0 ||
      static_cast<std::size_t>(predicted) >= num_classes_) {
    throw std::out_of_range("confusion matrix: label out of range (truth " + std::to_string(truth) +
                            ", predicted " + std::to_string(predicted) + ", classes " +
                            std::to_string(num_classes_) + ")");
  }
  ++counts_[static_cast<std::size_t>(truth) * num_classes_ + static_cast<std::size_t>(predicted)];
  ++total_;
}

void ConfusionMatrix::accumulate(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("confusion matrix: truth/prediction lengths differ");
  }
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predicted[i]);
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw std::invalid_argument("confusion matrix: cannot merge different class counts");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "truth\\predicted";
  for (const auto& name : class_names_) out += "," + name;
  out += "\n";
  for (std::size_t t = 0; t < num_classes_; ++t) {
    out += class_names_[t];
    for (std::size_t p = 0; p < num_classes_; ++p) {
      out += "," + std::to_string(count(t, p));
    }
    out += "\n";
  }
  return out;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm, Averaging averaging) {
  if (cm.total() == 0) throw std::invalid_argument("compute_metrics: empty confusion matrix");
  const std::size_t c = cm.num_classes();
  MetricsReport report;
  report.per_class_precision.resize(c);
  report.per_class_recall.resize(c);
  report.per_class_f1.resize(c);

  std::uint64_t trace = 0;
  double prec_acc = 0.0, rec_acc = 0.0, f1_acc = 0.0, weight_acc = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const std::uint64_t tp = cm.count(k, k);
    trace += tp;
    std::uint64_t fp = 0, fn = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (j == k) continue;
      fp += cm.count(j, k);
      fn += cm.count(k, j);
    }
    const double precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 =
        (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    report.per_class_precision[k] = precision;
    report.per_class_recall[k] = recall;
    report.per_class_f1[k] = f1;

    const double weight = averaging == Averaging::macro
                              ? 1.0
                              : static_cast<double>(tp + fn);  // class support
    prec_acc += weight * precision;
    rec_acc += weight * recall;
    f1_acc += weight * f1;
    weight_acc += weight;
  }

  report.accuracy = static_cast<double>(trace) / static_cast<double>(cm.total());
  report.precision = weight_acc > 0.0 ? prec_acc / weight_acc : 0.0;
  report.recall = weight_acc > 0.0 ? rec_acc / weight_acc : 0.0;
  report.f1 = weight_acc > 0.0 ? f1_acc / weight_acc : 0.0;
  return report;
}

}  // namespace leafnet
