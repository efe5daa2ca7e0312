#pragma once

#include <string>
#include <vector>

namespace tsseg {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // NaN entries are skipped
};

/// Static SVG line chart, y axis fixed to [0, 100] (accuracy in percent).
std::string accuracy_plot_svg(const std::vector<PlotSeries>& series, const std::string& title);

/// Reads a training log CSV and plots student train, teacher train and test accuracy per epoch.
std::string plot_training_log(const std::string& csv_path);

}  // namespace tsseg
