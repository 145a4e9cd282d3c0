#pragma once

#include <string>

#include "simm/analysis.hpp"
#include "simm/geometry.hpp"

namespace simm::plot {

/// Static SVG renderings of the plot datasets.
std::string isospace_svg(const IsospacePlotData& data);
std::string boxplot_svg(const BoxplotData& data);
std::string density_svg(const DensityPlotData& data);
std::string matrix_svg(const MatrixPlotData& data);
std::string prior_svg(const PriorVizData& data);

}  // namespace simm::plot
