// Copyright 2026 The cmbi Authors
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

#include "output.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace cmbi::cli {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string scan_to_csv(const ScanResult& scan) {
  std::ostringstream out;
  out << "varphi_rad,collective_phase_rad";
  for (const auto& name : scan.counter_names) out << ',' << name;
  out << '\n';
  for (const auto& p : scan.points) {
    out << format_number(p.varphi) << ',' << format_number(p.collective_phase);
    for (double v : p.counts.values) out << ',' << format_number(v);
    out << '\n';
  }
  return out.str();
}

nlohmann::json fit_to_json(const FitResult& fit) {
  return {{"A", fit.offset},
          {"B", fit.amplitude},
          {"delta_rad", fit.phase},
          {"visibility", fit.visibility},
          {"residual_norm", fit.residual_norm},
          {"n_points", fit.n_points}};
}

nlohmann::json calibration_to_json(const CalibrationResult& result) {
  nlohmann::json residuals = nlohmann::json::object();
  for (std::size_t i = 0; i < result.residuals.size(); ++i) residuals[result.observable_names.at(i)] = result.residuals[i];
  return {{"eta", result.eta},
          {"splitting_ratios", result.splitting_ratios},
          {"objective_value", result.objective_value},
          {"iterations", result.iterations},
          {"residuals", residuals}};
}

namespace {

constexpr double kWidth = 720, kHeight = 420, kMargin = 60;

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void draw_series(std::ostringstream& svg, const Frame& f, const std::vector<std::pair<double, double>>& pts,
                 const FitResult& fit, const char* colour) {
  svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
  for (int i = 0; i <= 200; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 200.0;
    svg << format_number(f.px(x)) << ',' << format_number(f.py(fit(x))) << ' ';
  }
  svg << "\"/>\n";
  for (const auto& [x, y] : pts) {
    svg << "<circle r=\"3\" fill=\"" << colour << "\" cx=\"" << format_number(f.px(x)) << "\" cy=\""
        << format_number(f.py(y)) << "\"/>\n";
  }
}

}  // namespace

std::string fringe_svg(const ScanResult& raw, const FitResult& raw_fit, const ScanResult& corrected,
                       const FitResult& corrected_fit, const std::string& counter) {
  const auto raw_pts = raw.series(counter);
  const auto cor_pts = corrected.series(counter);
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0,
          -std::numeric_limits<double>::infinity()};
  for (const auto* pts : {&raw_pts, &cor_pts}) {
    for (const auto& [x, y] : *pts) {
      f.x0 = std::min(f.x0, x);
      f.x1 = std::max(f.x1, x);
      f.y0 = std::min(f.y0, y);
      f.y1 = std::max(f.y1, y);
    }
  }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1;
  if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1;
  f.y1 += 0.05 * (f.y1 - f.y0);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  draw_series(svg, f, raw_pts, raw_fit, "gray");
  draw_series(svg, f, cor_pts, corrected_fit, "crimson");
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    svg << "<text font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"" << anchor << "\" x=\""
        << format_number(x) << "\" y=\"" << format_number(y) << "\">" << text << "</text>\n";
  };
  label(kMargin, kHeight - kMargin + 18, format_number(f.x0), "middle");
  label(kWidth - kMargin, kHeight - kMargin + 18, format_number(f.x1), "middle");
  label(kMargin - 6, kHeight - kMargin, format_number(f.y0), "end");
  label(kMargin - 6, kMargin + 4, format_number(f.y1), "end");
  label(kWidth / 2, kHeight - 15, "collective phase (rad)", "middle");
  label(kWidth / 2, 25,
        counter + ": raw V=" + format_number(raw_fit.visibility) + " (gray), corrected V=" +
            format_number(corrected_fit.visibility) + " (red)",
        "middle");
  svg << "</svg>\n";
  return svg.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw OutputError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw OutputError("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw OutputError("cannot move output into " + path.string());
  }
}

}  // namespace cmbi::cli
