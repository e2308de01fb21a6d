#include "leafnet/svg_report.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace leafnet {

RunSummary summarize_run(const RunCurve& run) {
  if (run.rows.empty()) throw std::invalid_argument("summarize_run: no epoch rows for " + run.name);
  RunSummary s;
  s.name = run.name;
  s.best_epoch = run.rows.front().epoch;
  s.best_val_accuracy = run.rows.front().val_accuracy;
  for (const EpochMetrics& r : run.rows) {
    if (r.val_accuracy > s.best_val_accuracy) {  // strict: ties keep the earlier epoch
      s.best_val_accuracy = r.val_accuracy;
      s.best_epoch = r.epoch;
    }
  }
  s.final_train_accuracy = run.rows.back().train_accuracy;
  return s;
}

namespace {

constexpr double kWidth = 760.0, kHeight = 480.0;
constexpr double kLeft = 64.0, kRight = 24.0, kTop = 48.0, kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_accuracy_svg(std::span<const RunCurve> runs) {
  if (runs.empty()) throw std::invalid_argument("render_accuracy_svg: no runs");
  std::uint64_t max_epoch = 1;
  for (const RunCurve& run : runs) {
    if (run.rows.empty()) throw std::invalid_argument("render_accuracy_svg: empty run " + run.name);
    for (const EpochMetrics& r : run.rows) max_epoch = std::max(max_epoch, r.epoch);
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](double epoch) {
    return max_epoch == 1 ? kLeft + plot_w / 2 : kLeft + (epoch - 1.0) / (max_epoch - 1.0) * plot_w;
  };
  const auto y_of = [&](double acc) { return kTop + (1.0 - acc) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">Train and validation accuracy vs. epoch</text>\n";

  // axes
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
         "\" y2=\"" + fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" +
         fmt(kLeft + plot_w) + "\" y2=\"" + fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double acc = tick / 5.0;
    svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y_of(acc) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + fmt(acc) +
           "</text>\n";
    svg += "<line x1=\"" + fmt(kLeft - 4) + "\" y1=\"" + fmt(y_of(acc)) + "\" x2=\"" + fmt(kLeft) +
           "\" y2=\"" + fmt(y_of(acc)) + "\" stroke=\"black\"/>\n";
  }
  svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 16) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">epoch</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 "
         "18 " + fmt(kTop + plot_h / 2) + ")\">accuracy</text>\n";
  svg += "<text x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop + plot_h + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">1</text>\n";
  svg += "<text x=\"" + fmt(kLeft + plot_w) + "\" y=\"" + fmt(kTop + plot_h + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
         std::to_string(max_epoch) + "</text>\n";

  // one train + one validation polyline per run
  double legend_y = kTop + 8;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const char* color = kPalette[r % (sizeof kPalette / sizeof kPalette[0])];
    for (int pass = 0; pass < 2; ++pass) {
      const bool train = pass == 0;
      std::string points;
      for (const EpochMetrics& row : runs[r].rows) {
        points += fmt(x_of(static_cast<double>(row.epoch))) + "," +
                  fmt(y_of(train ? row.train_accuracy : row.val_accuracy)) + " ";
      }
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"" +
             (train ? "" : " stroke-dasharray=\"6 3\"") + " points=\"" + points + "\"/>\n";
      svg += "<text x=\"" + fmt(kLeft + plot_w - 180) + "\" y=\"" + fmt(legend_y) +
             "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" + color + "\">" +
             runs[r].name + (train ? " (train)" : " (val, dashed)") + "</text>\n";
      legend_y += 14;
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace leafnet
