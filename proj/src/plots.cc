// Copyright 2026 The expost-erm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "expost/plots.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "expost/status_macros.h"

namespace expost {
namespace {

constexpr double kWidth = 680;
constexpr double kHeight = 420;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 55;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

const char* Color(size_t i) {
  return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Maps data coordinates to the plot area.
struct Axes {
  double x_lo, x_hi, y_lo, y_hi;
  bool log_y;

  double X(double x) const {
    return kLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight);
  }
  double Y(double y) const {
    double t;
    if (log_y) {
      t = (std::log10(y) - std::log10(y_lo)) /
          (std::log10(y_hi) - std::log10(y_lo));
    } else {
      t = (y - y_lo) / (y_hi - y_lo);
    }
    return kHeight - kBottom - t * (kHeight - kTop - kBottom);
  }
};

std::pair<double, double> PadRange(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0 ? 1.0 : 0.1 * std::abs(lo);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<double> LinearTicks(double lo, double hi) {
  const double raw = (hi - lo) / 5;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  double step = magnitude;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * magnitude;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step;
       t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

std::string Header(const ChartOptions& options) {
  std::string svg = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  absl::StrAppendFormat(&svg,
                        "<rect width=\"100%%\" height=\"100%%\" "
                        "fill=\"white\"/>\n");
  absl::StrAppendFormat(
      &svg,
      "<text x=\"%g\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">%s"
      "</text>\n",
      (kLeft + kWidth - kRight) / 2, Escape(options.title));
  absl::StrAppendFormat(
      &svg, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n",
      (kLeft + kWidth - kRight) / 2, kHeight - 12, Escape(options.x_label));
  absl::StrAppendFormat(
      &svg,
      "<text x=\"18\" y=\"%g\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 %g)\">%s</text>\n",
      (kTop + kHeight - kBottom) / 2, (kTop + kHeight - kBottom) / 2,
      Escape(options.y_label));
  return svg;
}

void AppendAxes(const Axes& axes, const std::vector<double>& x_ticks,
                std::string& svg) {
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  absl::StrAppendFormat(&svg,
                        "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                        "fill=\"none\" stroke=\"black\"/>\n",
                        x0, y1, x1 - x0, y0 - y1);
  for (double t : x_ticks) {
    const double x = axes.X(t);
    absl::StrAppendFormat(
        &svg,
        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
        "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%g</text>\n",
        x, y0, x, y0 + 5, x, y0 + 18, t);
  }
  std::vector<double> y_ticks;
  if (axes.log_y) {
    for (double e = std::ceil(std::log10(axes.y_lo));
         e <= std::floor(std::log10(axes.y_hi)); ++e) {
      y_ticks.push_back(std::pow(10.0, e));
    }
  } else {
    y_ticks = LinearTicks(axes.y_lo, axes.y_hi);
  }
  for (double t : y_ticks) {
    const double y = axes.Y(t);
    absl::StrAppendFormat(
        &svg,
        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#ddd\"/>\n"
        "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%g</text>\n",
        x0, y, x1, y, x0 - 6, y + 4, t);
  }
}

void AppendLegend(const std::vector<std::string>& names, std::string& svg) {
  for (size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 20 * i;
    absl::StrAppendFormat(
        &svg,
        "<rect x=\"%g\" y=\"%g\" width=\"14\" height=\"10\" fill=\"%s\"/>\n"
        "<text x=\"%g\" y=\"%g\">%s</text>\n",
        kWidth - kRight + 12, y - 9, Color(i), kWidth - kRight + 32, y,
        Escape(names[i]));
  }
}

std::vector<double> XTicks(const std::vector<double>& xs) {
  std::vector<double> unique(xs);
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.size() <= 8) return unique;
  return LinearTicks(unique.front(), unique.back());
}

absl::Status WriteText(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    return absl::InternalError(
        absl::StrFormat("failed writing %s", path.string()));
  }
  return absl::OkStatus();
}

std::string Num(double v) { return absl::StrFormat("%.17g", v); }

}  // namespace

std::string RenderLineChart(const std::vector<ChartSeries>& series,
                            const ChartOptions& options) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  std::vector<double> all_x;
  for (const ChartSeries& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double e = s.error.empty() ? 0.0 : s.error[i];
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      all_x.push_back(s.x[i]);
      if (options.log_y) {
        if (s.y[i] > 0) y_lo = std::min(y_lo, std::max(s.y[i] - e, s.y[i] / 2));
      } else {
        y_lo = std::min(y_lo, s.y[i] - e);
      }
      y_hi = std::max(y_hi, s.y[i] + e);
      if (options.diagonal) {
        y_hi = std::max(y_hi, s.x[i]);
        y_lo = std::min(y_lo, options.log_y ? y_lo : 0.0);
      }
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0;
    x_hi = 1;
    y_lo = options.log_y ? 0.1 : 0;
    y_hi = 1;
  }
  Axes axes;
  std::tie(axes.x_lo, axes.x_hi) = PadRange(x_lo, x_hi);
  axes.log_y = options.log_y;
  if (options.log_y) {
    if (!std::isfinite(y_lo)) y_lo = y_hi / 10;
    axes.y_lo = std::pow(10.0, std::floor(std::log10(y_lo)));
    axes.y_hi = std::pow(10.0, std::ceil(std::log10(y_hi)));
    if (axes.y_hi <= axes.y_lo) axes.y_hi = axes.y_lo * 10;
  } else {
    if (!options.diagonal) y_lo = std::min(y_lo, 0.0);
    std::tie(axes.y_lo, axes.y_hi) = PadRange(y_lo, y_hi);
  }

  std::string svg = Header(options);
  AppendAxes(axes, XTicks(all_x), svg);
  if (options.diagonal) {
    absl::StrAppendFormat(
        &svg,
        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"gray\" "
        "stroke-dasharray=\"5,4\"/>\n",
        axes.X(axes.x_lo), axes.Y(axes.x_lo), axes.X(axes.x_hi),
        axes.Y(axes.x_hi));
  }
  std::vector<std::string> names;
  for (size_t k = 0; k < series.size(); ++k) {
    const ChartSeries& s = series[k];
    names.push_back(s.name);
    std::string points;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (options.log_y && s.y[i] <= 0)) continue;
      const double px = axes.X(s.x[i]);
      const double py = axes.Y(s.y[i]);
      absl::StrAppendFormat(&points, "%g,%g ", px, py);
      absl::StrAppendFormat(&svg,
                            "<circle cx=\"%g\" cy=\"%g\" r=\"3.5\" "
                            "fill=\"%s\"/>\n",
                            px, py, Color(k));
      if (!s.error.empty() && s.error[i] > 0) {
        const double lo = options.log_y
                              ? std::max(s.y[i] - s.error[i], axes.y_lo)
                              : s.y[i] - s.error[i];
        absl::StrAppendFormat(&svg,
                              "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                              "stroke=\"%s\"/>\n",
                              px, axes.Y(lo), px, axes.Y(s.y[i] + s.error[i]),
                              Color(k));
      }
    }
    if (!points.empty()) {
      points.pop_back();
      absl::StrAppendFormat(&svg,
                            "<polyline points=\"%s\" fill=\"none\" "
                            "stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                            points, Color(k));
    }
  }
  AppendLegend(names, svg);
  svg += "</svg>\n";
  return svg;
}

std::string RenderStackedBars(const std::vector<ChartSeries>& lower,
                              const std::vector<ChartSeries>& upper,
                              const ChartOptions& options) {
  std::vector<double> xs;
  double y_hi = 0;
  for (size_t k = 0; k < lower.size(); ++k) {
    for (size_t i = 0; i < lower[k].x.size(); ++i) {
      xs.push_back(lower[k].x[i]);
      const double total = lower[k].y[i] + upper[k].y[i];
      if (std::isfinite(total)) y_hi = std::max(y_hi, total);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.empty()) xs.push_back(0);
  if (!(y_hi > 0)) y_hi = 1;

  // Bars sit at category positions 0..m-1 so uneven alpha spacing does not
  // squeeze them.
  Axes axes{-0.5, xs.size() - 0.5, 0.0, y_hi * 1.05, false};
  std::string svg = Header(options);
  AppendAxes(axes, {}, svg);
  const double slot = (axes.X(1) - axes.X(0)) * 0.8;
  const double bar = slot / std::max<size_t>(1, lower.size());
  for (size_t c = 0; c < xs.size(); ++c) {
    absl::StrAppendFormat(
        &svg, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%g</text>\n",
        axes.X(c), kHeight - kBottom + 18, xs[c]);
  }
  std::vector<std::string> names;
  for (size_t k = 0; k < lower.size(); ++k) {
    names.push_back(lower[k].name);
    for (size_t i = 0; i < lower[k].x.size(); ++i) {
      const size_t c =
          std::lower_bound(xs.begin(), xs.end(), lower[k].x[i]) - xs.begin();
      const double left = axes.X(c) - slot / 2 + bar * k;
      const double a = lower[k].y[i];
      const double b = upper[k].y[i];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      absl::StrAppendFormat(
          &svg,
          "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"%s\" "
          "fill-opacity=\"1.0\"/>\n"
          "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"%s\" "
          "fill-opacity=\"0.45\"/>\n",
          left, axes.Y(a), bar * 0.9, axes.Y(0) - axes.Y(a), Color(k), left,
          axes.Y(a + b), bar * 0.9, axes.Y(a) - axes.Y(a + b), Color(k));
    }
  }
  AppendLegend(names, svg);
  absl::StrAppendFormat(&svg,
                        "<text x=\"%g\" y=\"%g\" font-size=\"11\">solid: "
                        "test, light: generation</text>\n",
                        kWidth - kRight + 12, kTop + 20 * names.size() + 20);
  svg += "</svg>\n";
  return svg;
}

absl::StatusOr<std::vector<std::string>> EmitPlots(
    const std::vector<TrialRecord>& records, const std::string& out_dir) {
  if (records.empty()) {
    return absl::InvalidArgumentError("no trial records to plot");
  }
  const std::vector<SummaryRow> rows = Summarize(records);

  // Series per approach in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SummaryRow*>> by_approach;
  for (const SummaryRow& row : rows) {
    if (!by_approach.contains(row.approach)) order.push_back(row.approach);
    by_approach[row.approach].push_back(&row);
  }
  auto series_of = [&](auto value, auto error) {
    std::vector<ChartSeries> out;
    for (const std::string& name : order) {
      ChartSeries s;
      s.name = name;
      for (const SummaryRow* row : by_approach[name]) {
        const bool has_data = row->finite > 0;
        s.x.push_back(row->alpha);
        s.y.push_back(has_data ? value(*row)
                               : std::numeric_limits<double>::quiet_NaN());
        s.error.push_back(has_data ? error(*row) : 0.0);
      }
      out.push_back(std::move(s));
    }
    return out;
  };
  auto zero = [](const SummaryRow&) { return 0.0; };

  std::string eps_csv =
      "approach,alpha,eps_total_mean,eps_total_se,finite,bottoms,errors\n";
  std::string accuracy_csv =
      "approach,alpha,excess_risk_mean,excess_risk_se,accurate_fraction\n";
  std::string breakdown_csv = "approach,alpha,eps_test_mean,eps_generate_mean\n";
  std::string norms_csv = "approach,alpha,norm_mean\n";
  for (const SummaryRow& r : rows) {
    absl::StrAppend(&eps_csv, r.approach, ",", Num(r.alpha), ",",
                    Num(r.eps_total_mean), ",", Num(r.eps_total_se), ",",
                    r.finite, ",", r.bottoms, ",", r.errors, "\n");
    absl::StrAppend(&accuracy_csv, r.approach, ",", Num(r.alpha), ",",
                    Num(r.excess_risk_mean), ",", Num(r.excess_risk_se), ",",
                    Num(r.accurate_fraction), "\n");
    absl::StrAppend(&breakdown_csv, r.approach, ",", Num(r.alpha), ",",
                    Num(r.eps_test_mean), ",", Num(r.eps_generate_mean), "\n");
    absl::StrAppend(&norms_csv, r.approach, ",", Num(r.alpha), ",",
                    Num(r.norm_mean), "\n");
  }

  const std::vector<ChartSeries> eps_series = series_of(
      [](const SummaryRow& r) { return r.eps_total_mean; },
      [](const SummaryRow& r) { return r.eps_total_se; });
  double eps_lo = std::numeric_limits<double>::infinity();
  double eps_hi = 0;
  for (const ChartSeries& s : eps_series) {
    for (double y : s.y) {
      if (std::isfinite(y) && y > 0) {
        eps_lo = std::min(eps_lo, y);
        eps_hi = std::max(eps_hi, y);
      }
    }
  }
  ChartOptions eps_options{"Ex-post privacy loss", "alpha (target excess risk)",
                           "mean eps_total", eps_hi > 100 * eps_lo, false};
  ChartOptions accuracy_options{"Achieved excess risk",
                                "alpha (target excess risk)",
                                "mean excess risk", false, true};
  ChartOptions breakdown_options{"Privacy loss breakdown",
                                 "alpha (target excess risk)", "mean eps",
                                 false, false};
  ChartOptions norm_options{"Hypothesis norm", "alpha (target excess risk)",
                            "mean l2 norm", false, false};

  const std::string eps_svg = RenderLineChart(eps_series, eps_options);
  const std::string accuracy_svg = RenderLineChart(
      series_of([](const SummaryRow& r) { return r.excess_risk_mean; },
                [](const SummaryRow& r) { return r.excess_risk_se; }),
      accuracy_options);
  const std::string breakdown_svg = RenderStackedBars(
      series_of([](const SummaryRow& r) { return r.eps_test_mean; }, zero),
      series_of([](const SummaryRow& r) { return r.eps_generate_mean; }, zero),
      breakdown_options);
  const std::string norms_svg = RenderLineChart(
      series_of([](const SummaryRow& r) { return r.norm_mean; }, zero),
      norm_options);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrFormat(
        "cannot create output directory %s: %s", out_dir, ec.message()));
  }
  const std::filesystem::path dir(out_dir);
  const std::vector<std::pair<std::string, const std::string*>> files = {
      {"eps_total.svg", &eps_svg},         {"eps_total.csv", &eps_csv},
      {"accuracy.svg", &accuracy_svg},     {"accuracy.csv", &accuracy_csv},
      {"breakdown.svg", &breakdown_svg},   {"breakdown.csv", &breakdown_csv},
      {"norms.svg", &norms_svg},           {"norms.csv", &norms_csv},
  };
  std::vector<std::string> written;
  for (const auto& [name, text] : files) {
    RETURN_IF_ERROR(WriteText(dir / name, *text));
    written.push_back((dir / name).string());
  }
  return written;
}

absl::StatusOr<std::vector<std::string>> EmitPlotsFromFile(
    const std::string& records_path, const std::string& out_dir) {
  ASSIGN_OR_RETURN(std::vector<TrialRecord> records,
                   ReadTrialRecords(records_path));
  return EmitPlots(records, out_dir);
}

}  // namespace expost
