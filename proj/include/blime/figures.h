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

#ifndef BLIME_FIGURES_H_
#define BLIME_FIGURES_H_

#include <string>
#include <string_view>
#include <vector>

#include "blime/instance.h"
#include "blime/interpretable.h"

namespace blime {

// Deterministic SVG renderers. Output depends only on the arguments: fixed
// viewport, fixed number formatting, no external assets.

struct Rgb {
  int r = 0, g = 0, b = 0;
};

// Two-colour linear ramp, blue (low) to red (high); t is clamped to [0, 1].
Rgb RampColor(double t);

// Image with a per-superpixel heat overlay and one label per superpixel.
// `values` has one entry per component. Integer labels are printed without
// decimals. The legend shows the ramp with `value_min`/`value_max`.
std::string RenderImageOverlay(const Image& image, const SegmentMap& segments,
                               const std::vector<double>& values,
                               std::string_view title, bool integer_labels,
                               double value_min, double value_max);

// Table of tokens sorted by mean rank (descending) with bars for the mean
// rank and the ordinal consensus.
std::string RenderTokenTable(const std::vector<std::string>& tokens,
                             const std::vector<double>& mean_ranks,
                             const std::vector<double>& consensus,
                             std::string_view title);

struct LineSeries {
  std::string name;
  std::vector<double> values;  // one per x position
};

// Two stacked panels sharing the x axis (categorical, evenly spaced).
std::string RenderLinePanels(const std::vector<double>& x,
                             std::string_view x_label,
                             const std::vector<LineSeries>& top,
                             std::string_view top_label,
                             const std::vector<LineSeries>& bottom,
                             std::string_view bottom_label,
                             std::string_view title);

// Histogram-silhouette violins, one per sample vector, on a shared value
// axis. Each silhouette is mirrored around its centre line with half-width
// proportional to the bin count; the median is marked.
std::string RenderViolins(const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& samples,
                          std::string_view value_label, std::string_view title,
                          int bins = 24);

}  // namespace blime

#endif  // BLIME_FIGURES_H_
