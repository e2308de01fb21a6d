#pragma once

#include <span>
#include <string>
#include <vector>

#include "leafnet/epoch_log.hpp"

namespace leafnet {

struct RunCurve {
  std::string name;  // typically the epoch CSV stem
  std::vector<EpochMetrics> rows;
};

struct RunSummary {
  std::string name;
  std::uint64_t best_epoch = 0;  // highest val accuracy; earlier epoch wins ties
  double best_val_accuracy = 0.0;
  double final_train_accuracy = 0.0;
};

RunSummary summarize_run(const RunCurve& run);

// Self-contained accuracy-vs-epoch line chart: one train and one validation
// polyline per run, labeled axes, and a legend entry per curve.
std::string render_accuracy_svg(std::span<const RunCurve> runs);

}  // namespace leafnet
