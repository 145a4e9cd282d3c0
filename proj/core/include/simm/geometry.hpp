#pragma once

#include <array>
#include <string>
#include <vector>

#include "simm/model.hpp"

namespace simm {

struct CorrectedSources {
    Matrix position;  // K x J, source mean + correction mean
    Matrix spread;    // K x J, sqrt(source sd^2 + correction sd^2)
};

CorrectedSources corrected_sources(const SimmInput& input);

struct MixingRegionReport {
    std::vector<bool> inside;  // one per mixture row
    std::vector<std::string> warnings;
    /// J > 2 only: inside[i] for each tracer pair (a, b), a < b.
    std::vector<std::pair<Index, Index>> pairs;
    std::vector<std::vector<bool>> pair_inside;

    bool all_inside() const;
    std::string to_text(const SimmInput& input) const;
    std::string to_json(const SimmInput& input) const;
};

/// Boundary-inclusive test (absolute tolerance 1e-9) of each mixture against
/// the range (J = 1) or convex hull (J = 2) of the corrected sources. For
/// J > 2 each tracer pair is tested separately.
MixingRegionReport in_mixing_region(const SimmInput& input);

/// Lower-level pieces, exposed for testing.
using Point = std::array<double, 2>;
std::vector<Point> convex_hull(std::vector<Point> points);  // counter-clockwise, no collinear points
bool point_in_hull(const std::vector<Point>& hull, const Point& p, double tol = 1e-9);
double segment_distance(const Point& a, const Point& b, const Point& p);

struct IsospacePoint {
    std::string group;
    double x = 0.0;
    double y = 0.0;
};

struct IsospaceSource {
    std::string name;
    double x = 0.0;
    double y = 0.0;
    double x_spread = 0.0;
    double y_spread = 0.0;  // 0 when J = 1
};

struct IsospacePlotData {
    std::string x_label;
    std::string y_label;
    bool one_dimensional = false;
    std::vector<IsospacePoint> mixtures;
    std::vector<IsospaceSource> sources;

    std::string to_csv() const;
};

/// Mixtures of the listed groups plus corrected sources with +-1 spread bars.
/// For J = 1 the mixtures are spread along an arbitrary ordinate (their row
/// index within the plot) so that ties stay visible. Empty `groups` is an error.
/// Axis labels default to the first two tracer names.
IsospacePlotData isospace_plot_data(const SimmInput& input, const std::vector<std::string>& groups,
                                    const std::string& x_label = {},
                                    const std::string& y_label = {});

}  // namespace simm
