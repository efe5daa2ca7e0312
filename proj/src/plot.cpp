#include "tsseg/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tsseg/error.hpp"

namespace tsseg {

namespace {

constexpr double kWidth = 720, kHeight = 420, kLeft = 60, kRight = 160, kTop = 40, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string accuracy_plot_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  double xmin = 0, xmax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (double x : s.x) {
      xmin = first ? x : std::min(xmin, x);
      xmax = first ? x : std::max(xmax, x);
      first = false;
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - std::clamp(y, 0.0, 100.0) / 100.0) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  for (int g = 0; g <= 10; ++g) {
    const double y = py(g * 10.0);
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + pw << "\" y2=\""
        << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << g * 10
        << "</text>\n";
  }
  const int xticks = 10;
  for (int g = 0; g <= xticks; ++g) {
    const double xv = xmin + (xmax - xmin) * g / xticks;
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
        << num(xv).substr(0, num(xv).find('.')) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">epoch</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 " << kTop + ph / 2
      << ")\" text-anchor=\"middle\">frame-wise accuracy (%)</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    std::string points;
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      if (std::isnan(s.y[j])) continue;
      points += num(px(s.x[j])) + "," + num(py(s.y[j])) + " ";
    }
    if (!points.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points
          << "\"/>\n";
    }
    const double ly = kTop + 20 + 20.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + pw + 42 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string plot_training_log(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv_path + ": empty log");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(csv_path + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_epoch = column("epoch");
  const std::vector<std::pair<std::string, std::size_t>> wanted = {
      {"student (train)", column("student_train_acc")},
      {"teacher (train)", column("teacher_train_acc")},
      {"test", column("test_acc")}};
  std::vector<PlotSeries> series;
  for (const auto& [name, col] : wanted) series.push_back({name, {}, {}});
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < header.size()) cells.emplace_back();
    double epoch = 0;
    try {
      epoch = std::stod(cells[c_epoch]);
    } catch (const std::exception&) {
      throw DataError(csv_path + ": bad epoch on line " + std::to_string(lineno));
    }
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      const std::string& v = cells[wanted[i].second];
      series[i].x.push_back(epoch);
      series[i].y.push_back(v.empty() ? std::nan("") : std::stod(v));
    }
  }
  return accuracy_plot_svg(series, "Frame-wise accuracy per epoch");
}

}  // namespace tsseg
