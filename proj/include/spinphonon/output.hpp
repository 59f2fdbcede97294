// Copyright 2026 The spinphonon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Result files: CSV tables, a JSON summary and simple SVG plots.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinphonon {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes named files below one directory. All writes go through a single
/// mutex so sweep workers may emit files concurrently.
class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw OutputError("cannot create output directory '" + dir_.string() + "'");
    }
  }

  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw OutputError("write to '" + path.string() + "' failed");
    written_.push_back(name);
  }

  std::vector<std::string> written() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return written_;
  }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::vector<std::string> written_;
};

/// Column table; every column must have the same length.
inline std::string columns_csv(const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
  if (cols.empty()) throw std::invalid_argument("table needs at least one column");
  const std::size_t n = cols.front().second.size();
  for (const auto& [name, v] : cols) {
    if (v.size() != n) throw std::invalid_argument("column '" + name + "' has a different length");
  }
  std::ostringstream os;
  os << std::setprecision(12);
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c].first;
  os << '\n';
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c].second[r];
    os << '\n';
  }
  return os.str();
}

namespace svg {

inline constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::pair<double, double> finite_range(const std::vector<double>& v) {
  double lo = INFINITY, hi = -INFINITY;
  for (double x : v) {
    if (std::isfinite(x)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi == lo) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

inline void frame(std::ostringstream& os, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, std::pair<double, double> xr, std::pair<double, double> yr) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xr.first + (xr.second - xr.first) * k / 4.0;
    const double fy = yr.first + (yr.second - yr.first) * k / 4.0;
    const double px = kLeft + pw * k / 4.0, py = kTop + ph * (1.0 - k / 4.0);
    os << "<text x=\"" << px << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << fmt(fx)
       << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";
}

}  // namespace svg

/// Line plot of several series against one x axis.
inline std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                 const std::vector<double>& x,
                                 const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::vector<double> all;
  for (const auto& [n, y] : series) all.insert(all.end(), y.begin(), y.end());
  const auto xr = svg::finite_range(x), yr = svg::finite_range(all);
  std::ostringstream os;
  svg::frame(os, title, xlabel, ylabel, xr, yr);
  const double pw = svg::kWidth - svg::kLeft - svg::kRight, ph = svg::kHeight - svg::kTop - svg::kBottom;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& y = series[s].second;
    os << "<polyline fill=\"none\" stroke=\"" << colors[s % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
      if (!std::isfinite(y[k])) continue;
      const double px = svg::kLeft + pw * (x[k] - xr.first) / (xr.second - xr.first);
      const double py = svg::kTop + ph * (1.0 - (y[k] - yr.first) / (yr.second - yr.first));
      os << svg::fmt(px) << ',' << svg::fmt(py) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << svg::kLeft + 8 << "\" y=\"" << svg::kTop + 16 + 14 * s << "\" fill=\"" << colors[s % 6]
       << "\">" << svg::escape(series[s].first) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Heat map of z[i * ny + j] over rows x[i] (vertical) and columns y[j].
inline std::string heatmap_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                               const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& z) {
  if (z.size() != x.size() * y.size()) throw std::invalid_argument("heat map size mismatch");
  const auto yr = svg::finite_range(x), xr = svg::finite_range(y), zr = svg::finite_range(z);
  std::ostringstream os;
  svg::frame(os, title, ylabel, xlabel, xr, yr);
  const double pw = svg::kWidth - svg::kLeft - svg::kRight, ph = svg::kHeight - svg::kTop - svg::kBottom;
  const double cw = pw / double(y.size()), ch = ph / double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double v = z[i * y.size() + j];
      const double u = std::isfinite(v) ? (v - zr.first) / (zr.second - zr.first) : 0.0;
      const int r = static_cast<int>(std::lround(255 * u));
      const int b = 255 - r;
      os << "<rect x=\"" << svg::fmt(svg::kLeft + cw * j) << "\" y=\""
         << svg::fmt(svg::kTop + ph - ch * double(i + 1)) << "\" width=\"" << svg::fmt(cw + 0.5) << "\" height=\""
         << svg::fmt(ch + 0.5) << "\" fill=\"rgb(" << r << ",40," << b << ")\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace spinphonon
