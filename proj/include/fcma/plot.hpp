#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fcma/core.hpp"
#include "fcma/trace.hpp"

namespace fcma {

struct PlotSeries {
  std::string label;
  std::vector<double> epochs;
  std::vector<double> values;
};

/// Reads the epoch, f_tilde and f_true columns back from a trace CSV.
inline std::vector<PlotSeries> load_trace_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::string header;
  if (!std::getline(in, header) || header != kTraceCsvHeader)
    throw ConfigError("unexpected trace header in " + path);

  std::string stem = path;
  if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (const auto dot = stem.rfind('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);

  PlotSeries est{stem + ":f_tilde", {}, {}};
  PlotSeries tru{stem + ":f_true", {}, {}};
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() < 11) continue;
    const double epoch = std::stod(cols[0]);
    if (!cols[1].empty()) {
      est.epochs.push_back(epoch);
      est.values.push_back(std::stod(cols[1]));
    }
    if (!cols[9].empty()) {
      tru.epochs.push_back(epoch);
      tru.values.push_back(std::stod(cols[9]));
    }
  }
  std::vector<PlotSeries> out;
  if (!est.epochs.empty()) out.push_back(std::move(est));
  if (!tru.epochs.empty()) out.push_back(std::move(tru));
  return out;
}

/// Writes a single SVG plot of loss vs. epoch, one polyline per series.
/// With log_scale, rows with value <= 0 are dropped with a warning.
inline void emit_plot(const std::vector<PlotSeries>& series_in,
                      const std::string& out_path, bool log_scale = false) {
  if (series_in.empty()) throw ConfigError("emit_plot: no trace data");

  std::vector<PlotSeries> series = series_in;
  if (log_scale) {
    for (PlotSeries& s : series) {
      PlotSeries kept{s.label, {}, {}};
      int dropped = 0;
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.values[i] > 0) {
          kept.epochs.push_back(s.epochs[i]);
          kept.values.push_back(std::log10(s.values[i]));
        } else {
          ++dropped;
        }
      }
      if (dropped > 0)
        std::cerr << "warning: dropped " << dropped
                  << " non-positive rows from " << s.label
                  << " for log scale\n";
      s = std::move(kept);
    }
    series.erase(std::remove_if(series.begin(), series.end(),
                                [](const PlotSeries& s) {
                                  return s.epochs.empty();
                                }),
                 series.end());
    if (series.empty())
      throw ConfigError("emit_plot: nothing left to plot after log filter");
  }

  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.epochs.size(); ++i) {
      xmin = std::min(xmin, s.epochs[i]);
      xmax = std::max(xmax, s.epochs[i]);
      ymin = std::min(ymin, s.values[i]);
      ymax = std::max(ymax, s.values[i]);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  const int width = 860, height = 520, margin = 60;
  auto sx = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  auto sy = [&](double y) {
    return height - margin -
           (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write plot file: " + out_path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin
      << "\" x2=\"" << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\""
      << margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\" font-size=\"13\">epoch</text>\n"
      << "<text x=\"18\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << height / 2 << ")\">" << (log_scale ? "log10(loss)" : "loss")
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kColors[si % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.epochs.size(); ++i)
      out << sx(s.epochs[i]) << ',' << sy(s.values[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << width - margin - 200 << "\" y=\""
        << margin + 16 * (si + 1) << "\" font-size=\"12\" fill=\"" << color
        << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fcma
