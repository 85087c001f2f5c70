// Copyright 2026 The LatentLens Authors
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

#pragma once

// Dependency-free SVG rendering of line plots, heatmaps and mode shapes.
// Every data series is a single <path> and every heatmap cell a <rect> or
// <path>, so output can be checked by parsing the document.

#include <string>
#include <vector>

#include "latentlens/numerics.hpp"
#include "latentlens/pod.hpp"

namespace latentlens {

struct LineSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

std::string svg_line_plot(const std::vector<LineSeries>& series, const PlotOptions& options);

/// Colour-mapped matrix, row 0 at the top.
std::string svg_heatmap(const Matrix& values, const PlotOptions& options,
                        const std::vector<std::string>& row_labels = {},
                        const std::vector<std::string>& col_labels = {});

/// One panel per column of `modes`, drawn on `grid`: rectangles for
/// Cartesian grids, annular sectors for polar grids and a strip otherwise.
std::string svg_mode_panels(const Matrix& modes, const GridMeta& grid, const PlotOptions& options,
                            const std::vector<std::string>& titles = {});

}  // namespace latentlens
