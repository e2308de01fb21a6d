#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafnet {

enum class Averaging { macro, weighted };

// Per-class breakdown plus the averaged accuracy/precision/recall/F1 quadruple.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<double> per_class_precision;
  std::vector<double> per_class_recall;
  std::vector<double> per_class_f1;

  // One CSV row: dataset,split,accuracy,precision,recall,f1 (6 decimal places).
  std::string csv_row(const std::string& dataset, const std::string& split) const;
  static std::string csv_header() { return "dataset,split,accuracy,precision,recall,f1"; }
};

// C x C tally; rows are the true class, columns the predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::size_t num_classes, std::vector<std::string> class_names = {});

  void add(int truth, int predicted);
  void accumulate(std::span<const int> truth, std::span<const int> predicted);

  // Shards may be tallied independently and merged by elementwise addition.
  void merge(const ConfusionMatrix& other);

  std::uint64_t count(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * num_classes_ + predicted];
  }
  std::uint64_t total() const { return total_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  std::string to_csv() const;

 private:
  std::size_t num_classes_;
  std::vector<std::string> class_names_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Per-class precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = harmonic mean,
// averaged across classes (macro by default). A class with zero predicted or
// zero actual samples contributes 0 to its undefined metric, so the macro
// denominator is always the class count.
MetricsReport compute_metrics(const ConfusionMatrix& cm, Averaging averaging = Averaging::macro);

}  // namespace leafnet
