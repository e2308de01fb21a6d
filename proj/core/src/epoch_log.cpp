#include "leafnet/epoch_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace leafnet {

namespace {
constexpr const char* kHeader = "epoch,train_loss,train_acc,val_loss,val_acc,seconds";
}

std::string epoch_csv_text(std::span<const EpochMetrics> rows, bool include_timing) {
  std::string out = kHeader;
  out += "\n";
  char buf[160];
  for (const EpochMetrics& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%.6f,%.6f,%.6f,%.6f,%.3f\n",
                  static_cast<unsigned long long>(r.epoch), r.train_loss, r.train_accuracy,
                  r.val_loss, r.val_accuracy, include_timing ? r.wall_seconds : 0.0);
    out += buf;
  }
  return out;
}

void write_epoch_csv(const std::string& path, std::span<const EpochMetrics> rows,
                     bool include_timing) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write epoch log: " + path);
  out << epoch_csv_text(rows, include_timing);
}

std::vector<EpochMetrics> read_epoch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read epoch log: " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<EpochMetrics> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kHeader) {
        throw std::runtime_error(path + ": line 1: expected header \"" + kHeader + "\"");
      }
      continue;
    }
    EpochMetrics r;
    unsigned long long epoch = 0;
    const int got = std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf,%lf,%lf", &epoch, &r.train_loss,
                                &r.train_accuracy, &r.val_loss, &r.val_accuracy, &r.wall_seconds);
    if (got != 6) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": malformed row \"" +
                               line + "\"");
    }
    r.epoch = epoch;
    rows.push_back(r);
  }
  if (rows.empty()) {
    throw std::runtime_error(path + ": no epoch rows found");
  }
  return rows;
}

}  // namespace leafnet
