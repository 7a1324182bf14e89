#pragma once

#include <string>
#include <vector>

#include "deeppde/grid.hpp"
#include "deeppde/train.hpp"

namespace deeppde {

/// Scatter of L2 error versus evaluation time, one point per method, as SVG.
std::string plot_error_scatter(std::span<const ResultRow> rows);

/// Per-sample comparison: input, reference and model output. One-dimensional
/// fields become polylines; two-dimensional fields become heat maps.
struct SamplePlotSeries {
  std::string label;
  GridFunction field;
};
std::string plot_sample(std::span<const SamplePlotSeries> series);

/// Minimal XML well-formedness check (tag balance, attribute quoting).
bool svg_well_formed(const std::string& text);

}  // namespace deeppde
