#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace leafnet {

// One row of the training log; Fig-style accuracy curves and the epoch CSV
// are derived from these.
struct EpochMetrics {
  std::uint64_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;
};

// CSV schema: epoch,train_loss,train_acc,val_loss,val_acc,seconds.
// The seconds column is written as 0.000 unless include_timing is set, so
// identically seeded runs produce byte-identical files.
std::string epoch_csv_text(std::span<const EpochMetrics> rows, bool include_timing = false);
void write_epoch_csv(const std::string& path, std::span<const EpochMetrics> rows,
                     bool include_timing = false);

// Parses a file written by write_epoch_csv; malformed rows are reported with
// their 1-based line number.
std::vector<EpochMetrics> read_epoch_csv(const std::string& path);

}  // namespace leafnet
