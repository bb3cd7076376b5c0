/*
 * Copyright 2026 The BLIME Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "blime/figures.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "blime/error.h"

namespace blime {

namespace {

constexpr char kFont[] = "DejaVu Sans, Arial, sans-serif";

// Categorical palette for line series.
constexpr Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                            {214, 39, 40},  {148, 103, 189}, {140, 86, 75},
                            {227, 119, 194}, {127, 127, 127}, {188, 189, 34},
                            {23, 190, 207}};

std::string Num(double v) {
  if (!std::isfinite(v)) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string Label(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  if (s.size() > 1 && s[0] == '-' &&
      s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

std::string Hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string Escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

class Svg {
 public:
  Svg(double width, double height) {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(width) +
           "\" height=\"" + Num(height) + "\" viewBox=\"0 0 " + Num(width) +
           " " + Num(height) + "\">\n";
    Rect(0, 0, width, height, "#ffffff");
  }

  void Raw(const std::string& s) { out_ += s; }

  void Rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0, const std::string& stroke = "") {
    out_ += "<rect x=\"" + Num(x) + "\" y=\"" + Num(y) + "\" width=\"" +
            Num(w) + "\" height=\"" + Num(h) + "\" fill=\"" + fill + "\"";
    if (opacity < 1.0) out_ += " fill-opacity=\"" + Num(opacity) + "\"";
    if (!stroke.empty()) out_ += " stroke=\"" + stroke + "\"";
    out_ += "/>\n";
  }

  void Line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double width = 1.0) {
    out_ += "<line x1=\"" + Num(x1) + "\" y1=\"" + Num(y1) + "\" x2=\"" +
            Num(x2) + "\" y2=\"" + Num(y2) + "\" stroke=\"" + stroke +
            "\" stroke-width=\"" + Num(width) + "\"/>\n";
  }

  void Polyline(const std::vector<std::pair<double, double>>& points,
                const std::string& stroke) {
    out_ += "<polyline fill=\"none\" stroke=\"" + stroke +
            "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < points.size(); ++i) {
      if (i) out_ += ' ';
      out_ += Num(points[i].first) + "," + Num(points[i].second);
    }
    out_ += "\"/>\n";
  }

  void Circle(double cx, double cy, double r, const std::string& fill) {
    out_ += "<circle cx=\"" + Num(cx) + "\" cy=\"" + Num(cy) + "\" r=\"" +
            Num(r) + "\" fill=\"" + fill + "\"/>\n";
  }

  void Path(const std::string& d, const std::string& fill,
            const std::string& stroke) {
    out_ += "<path d=\"" + d + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
            "\" stroke-width=\"1\"/>\n";
  }

  void Text(double x, double y, std::string_view text, double size,
            const char* anchor = "start", const std::string& fill = "#000000",
            const char* extra = "") {
    out_ += "<text x=\"" + Num(x) + "\" y=\"" + Num(y) + "\" font-family=\"" +
            kFont + "\" font-size=\"" + Num(size) + "\" text-anchor=\"" +
            anchor + "\" fill=\"" + fill + "\"" + extra + ">" + Escape(text) +
            "</text>\n";
  }

  std::string Finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

// Horizontal colour bar with min/max annotations.
void Legend(Svg& svg, double x, double y, double width, double value_min,
            double value_max, bool integer_labels) {
  constexpr int kSteps = 32;
  const double step = width / kSteps;
  for (int i = 0; i < kSteps; ++i) {
    svg.Rect(x + i * step, y, step + 0.01, 10,
             Hex(RampColor((i + 0.5) / kSteps)));
  }
  svg.Rect(x, y, width, 10, "none", 1.0, "#333333");
  const int decimals = integer_labels ? 0 : 2;
  svg.Text(x, y + 24, "min " + Label(value_min, decimals), 11);
  svg.Text(x + width, y + 24, "max " + Label(value_max, decimals), 11, "end");
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range PaddedRange(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

}  // namespace

Rgb RampColor(double t) {
  t = std::isfinite(t) ? std::clamp(t, 0.0, 1.0) : 0.0;
  constexpr Rgb kLow{33, 102, 172};
  constexpr Rgb kHigh{178, 24, 43};
  auto lerp = [t](int a, int b) {
    return static_cast<int>(std::lround(a + (b - a) * t));
  };
  return {lerp(kLow.r, kHigh.r), lerp(kLow.g, kHigh.g), lerp(kLow.b, kHigh.b)};
}

std::string RenderImageOverlay(const Image& image, const SegmentMap& segments,
                               const std::vector<double>& values,
                               std::string_view title, bool integer_labels,
                               double value_min, double value_max) {
  if (segments.width != image.width || segments.height != image.height) {
    throw InputError("segment map does not match the image");
  }
  if (values.size() != static_cast<size_t>(segments.num_components)) {
    throw InputError("one overlay value per component required");
  }
  const double scale =
      std::max(1.0, std::floor(320.0 / std::max(image.width, image.height)));
  const double margin = 20.0;
  const double top = 40.0;
  const double plot_w = image.width * scale;
  const double plot_h = image.height * scale;
  Svg svg(plot_w + 2 * margin, top + plot_h + 60);
  svg.Text(margin, 24, title, 14);

  // Image pixels, merged into horizontal runs of equal colour.
  for (int y = 0; y < image.height; ++y) {
    int x = 0;
    while (x < image.width) {
      auto color = [&](int px) {
        if (image.channels == 1) {
          const int g = image.at(px, y, 0);
          return Rgb{g, g, g};
        }
        return Rgb{image.at(px, y, 0), image.at(px, y, 1), image.at(px, y, 2)};
      };
      const Rgb c = color(x);
      int end = x + 1;
      while (end < image.width) {
        const Rgb d = color(end);
        if (d.r != c.r || d.g != c.g || d.b != c.b) break;
        ++end;
      }
      svg.Rect(margin + x * scale, top + y * scale, (end - x) * scale, scale,
               Hex(c));
      x = end;
    }
  }

  // Overlay, merged into runs of equal label.
  const double span = value_max - value_min;
  std::vector<std::string> fills(values.size());
  for (size_t j = 0; j < values.size(); ++j) {
    fills[j] = Hex(RampColor(span > 0 ? (values[j] - value_min) / span : 0.5));
  }
  for (int y = 0; y < segments.height; ++y) {
    int x = 0;
    while (x < segments.width) {
      const int label = segments.label(x, y);
      int end = x + 1;
      while (end < segments.width && segments.label(end, y) == label) ++end;
      svg.Rect(margin + x * scale, top + y * scale, (end - x) * scale, scale,
               fills[label], 0.6);
      x = end;
    }
  }

  // Superpixel boundaries.
  for (int y = 0; y < segments.height; ++y) {
    for (int x = 0; x < segments.width; ++x) {
      if (x + 1 < segments.width && segments.label(x, y) != segments.label(x + 1, y)) {
        const double lx = margin + (x + 1) * scale;
        svg.Line(lx, top + y * scale, lx, top + (y + 1) * scale, "#ffffff");
      }
      if (y + 1 < segments.height && segments.label(x, y) != segments.label(x, y + 1)) {
        const double ly = top + (y + 1) * scale;
        svg.Line(margin + x * scale, ly, margin + (x + 1) * scale, ly, "#ffffff");
      }
    }
  }

  // Labels at component centroids.
  std::vector<double> cx(values.size(), 0.0), cy(values.size(), 0.0);
  std::vector<double> count(values.size(), 0.0);
  for (int y = 0; y < segments.height; ++y) {
    for (int x = 0; x < segments.width; ++x) {
      const int label = segments.label(x, y);
      cx[label] += x + 0.5;
      cy[label] += y + 0.5;
      count[label] += 1.0;
    }
  }
  for (size_t j = 0; j < values.size(); ++j) {
    const double x = margin + cx[j] / count[j] * scale;
    const double y = top + cy[j] / count[j] * scale;
    const std::string text =
        integer_labels ? Label(values[j], 0) : Label(values[j], 2);
    svg.Text(x, y + 5, text, 14, "middle", "#ffffff",
             " font-weight=\"bold\" stroke=\"#000000\" stroke-width=\"0.6\"");
  }

  Legend(svg, margin, top + plot_h + 14, plot_w, value_min, value_max,
         integer_labels);
  return svg.Finish();
}

std::string RenderTokenTable(const std::vector<std::string>& tokens,
                             const std::vector<double>& mean_ranks,
                             const std::vector<double>& consensus,
                             std::string_view title) {
  const size_t m = tokens.size();
  if (mean_ranks.size() != m || consensus.size() != m) {
    throw InputError("token table columns differ in length");
  }
  std::vector<size_t> order(m);
  for (size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return mean_ranks[a] > mean_ranks[b];
  });

  const double row_h = 22.0;
  const double top = 64.0;
  const double bar_w = 180.0;
  const double x_token = 20.0, x_rank = 180.0, x_cons = 440.0;
  Svg svg(680, top + row_h * m + 20);
  svg.Text(20, 24, title, 14);
  svg.Text(x_token, 52, "token", 12, "start", "#000000", " font-weight=\"bold\"");
  svg.Text(x_rank, 52, "mean rank (1.." + std::to_string(m) + ")", 12, "start",
           "#000000", " font-weight=\"bold\"");
  svg.Text(x_cons, 52, "consensus C", 12, "start", "#000000",
           " font-weight=\"bold\"");
  for (size_t row = 0; row < m; ++row) {
    const size_t j = order[row];
    const double y = top + row * row_h;
    if (row % 2 == 0) svg.Rect(10, y, 660, row_h, "#f2f2f2");
    svg.Text(x_token, y + 15, tokens[j], 12);
    const double rank_t = m > 1 ? (mean_ranks[j] - 1.0) / (m - 1.0) : 1.0;
    svg.Rect(x_rank, y + 5, bar_w * std::clamp(rank_t, 0.0, 1.0), 12,
             Hex(RampColor(rank_t)));
    svg.Text(x_rank + bar_w + 8, y + 15, Label(mean_ranks[j], 2), 11);
    svg.Rect(x_cons, y + 5, bar_w * std::clamp(consensus[j], 0.0, 1.0), 12,
             Hex(RampColor(consensus[j])));
    svg.Text(x_cons + bar_w + 8, y + 15, Label(consensus[j], 3), 11);
  }
  return svg.Finish();
}

std::string RenderLinePanels(const std::vector<double>& x,
                             std::string_view x_label,
                             const std::vector<LineSeries>& top,
                             std::string_view top_label,
                             const std::vector<LineSeries>& bottom,
                             std::string_view bottom_label,
                             std::string_view title) {
  if (x.empty()) throw InputError("line plot needs at least one x value");
  const double width = 720, left = 70, right = 130, panel_h = 220, gap = 60;
  const double plot_w = width - left - right;
  const double first_top = 50;
  Svg svg(width, first_top + 2 * panel_h + gap + 60);
  svg.Text(left, 26, title, 14);

  auto x_pos = [&](size_t i) {
    return x.size() == 1 ? left + plot_w / 2
                         : left + plot_w * static_cast<double>(i) / (x.size() - 1);
  };

  auto panel = [&](const std::vector<LineSeries>& series, double y0,
                   std::string_view label) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const LineSeries& s : series) {
      if (s.values.size() != x.size()) {
        throw InputError("series '" + s.name + "' length differs from x");
      }
      for (double v : s.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    const Range r = PaddedRange(lo, hi);
    auto y_pos = [&](double v) {
      return y0 + panel_h - (v - r.lo) / (r.hi - r.lo) * panel_h;
    };
    svg.Rect(left, y0, plot_w, panel_h, "none", 1.0, "#333333");
    for (int t = 0; t <= 4; ++t) {
      const double v = r.lo + (r.hi - r.lo) * t / 4.0;
      const double y = y_pos(v);
      svg.Line(left - 4, y, left, y, "#333333");
      svg.Text(left - 6, y + 4, Label(v, 2), 10, "end");
    }
    svg.Text(18, y0 + panel_h / 2, label, 12, "middle", "#000000",
             (" transform=\"rotate(-90 18 " + Num(y0 + panel_h / 2) + ")\"").c_str());
    for (size_t s = 0; s < series.size(); ++s) {
      const std::string color = Hex(kPalette[s % std::size(kPalette)]);
      std::vector<std::pair<double, double>> points;
      for (size_t i = 0; i < x.size(); ++i) {
        points.emplace_back(x_pos(i), y_pos(series[s].values[i]));
      }
      svg.Polyline(points, color);
      for (const auto& [px, py] : points) svg.Circle(px, py, 2.5, color);
      svg.Rect(left + plot_w + 16, y0 + 8 + s * 18, 12, 10, color);
      svg.Text(left + plot_w + 34, y0 + 17 + s * 18, series[s].name, 11);
    }
  };

  panel(top, first_top, top_label);
  const double second_top = first_top + panel_h + gap;
  panel(bottom, second_top, bottom_label);
  for (size_t i = 0; i < x.size(); ++i) {
    const double px = x_pos(i);
    for (double y0 : {first_top, second_top}) {
      svg.Line(px, y0 + panel_h, px, y0 + panel_h + 4, "#333333");
      svg.Text(px, y0 + panel_h + 16, Label(x[i], x[i] == std::floor(x[i]) ? 0 : 2),
               10, "middle");
    }
  }
  svg.Text(left + plot_w / 2, second_top + panel_h + 40, x_label, 12, "middle");
  return svg.Finish();
}

std::string RenderViolins(const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& samples,
                          std::string_view value_label, std::string_view title,
                          int bins) {
  if (names.size() != samples.size() || names.empty()) {
    throw InputError("violin plot needs one name per sample vector");
  }
  if (bins < 2) throw InputError("violin plot needs at least 2 bins");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : samples) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  const Range r = PaddedRange(lo, hi);

  const double left = 70, top = 50, plot_h = 360;
  const double slot = 64;
  const double plot_w = slot * names.size();
  Svg svg(left + plot_w + 30, top + plot_h + 60);
  svg.Text(left, 26, title, 14);
  auto y_pos = [&](double v) {
    return top + plot_h - (v - r.lo) / (r.hi - r.lo) * plot_h;
  };
  svg.Rect(left, top, plot_w, plot_h, "none", 1.0, "#333333");
  for (int t = 0; t <= 5; ++t) {
    const double v = r.lo + (r.hi - r.lo) * t / 5.0;
    const double y = y_pos(v);
    svg.Line(left - 4, y, left, y, "#333333");
    svg.Text(left - 6, y + 4, Label(v, 3), 10, "end");
  }
  if (r.lo < 0 && r.hi > 0) {
    svg.Line(left, y_pos(0), left + plot_w, y_pos(0), "#bbbbbb");
  }
  svg.Text(18, top + plot_h / 2, value_label, 12, "middle", "#000000",
           (" transform=\"rotate(-90 18 " + Num(top + plot_h / 2) + ")\"").c_str());

  const double bin_h = (r.hi - r.lo) / bins;
  for (size_t s = 0; s < samples.size(); ++s) {
    const double cx = left + slot * (s + 0.5);
    svg.Text(cx, top + plot_h + 18, names[s], 11, "middle");
    if (samples[s].empty()) continue;
    std::vector<int> counts(bins, 0);
    for (double v : samples[s]) {
      int b = static_cast<int>((v - r.lo) / bin_h);
      ++counts[std::clamp(b, 0, bins - 1)];
    }
    const int peak = *std::max_element(counts.begin(), counts.end());
    const double half = slot * 0.42;
    // Step silhouette: right edge bottom to top, left edge top to bottom.
    std::string d;
    auto add = [&d](char cmd, double x, double y) {
      d += cmd;
      d += Num(x) + "," + Num(y) + " ";
    };
    add('M', cx, y_pos(r.lo));
    for (int b = 0; b < bins; ++b) {
      const double w = half * counts[b] / peak;
      add('L', cx + w, y_pos(r.lo + b * bin_h));
      add('L', cx + w, y_pos(r.lo + (b + 1) * bin_h));
    }
    for (int b = bins - 1; b >= 0; --b) {
      const double w = half * counts[b] / peak;
      add('L', cx - w, y_pos(r.lo + (b + 1) * bin_h));
      add('L', cx - w, y_pos(r.lo + b * bin_h));
    }
    d += "Z";
    const std::string color = Hex(kPalette[s % std::size(kPalette)]);
    svg.Path(d, color, "#333333");

    std::vector<double> sorted = samples[s];
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    const double median =
        n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    svg.Line(cx - half * 0.6, y_pos(median), cx + half * 0.6, y_pos(median),
             "#000000", 2.0);
  }
  return svg.Finish();
}

}  // namespace blime
