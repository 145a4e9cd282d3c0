#pragma once

#include <vector>

#include "simm/model.hpp"

namespace simm::stats {

using VecRef = Eigen::Ref<const Vector>;

double mean(const VecRef& x);
/// Sample standard deviation (n - 1 denominator).
double sd(const VecRef& x);

/// Type-7 (linear interpolation) quantile, prob in [0, 1].
double quantile(const VecRef& x, double prob);
std::vector<double> quantiles(const VecRef& x, const std::vector<double>& probs);

double pearson(const VecRef& x, const VecRef& y);
/// Pearson correlations between the columns of `draws`.
Matrix correlation_matrix(const Matrix& draws);

/// Tukey boxplot: whiskers reach the most extreme points within 1.5 IQR.
struct BoxplotStats {
    double lower_whisker = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double upper_whisker = 0.0;
    std::vector<double> outliers;
};

BoxplotStats boxplot(const VecRef& x);

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5). Falls back to a
/// small positive width for constant data.
double silverman_bandwidth(const VecRef& x);

struct DensityCurve {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
};

/// Gaussian KDE evaluated on `points` equally spaced values in [lo, hi].
DensityCurve kde(const VecRef& x, double lo, double hi, int points = 128);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<double> counts;
};

Histogram histogram(const VecRef& x, double lo, double hi, int bins = 30);

struct DensityGrid {
    std::vector<double> x;
    std::vector<double> y;
    Matrix z;  // z(ix, iy)
};

/// Product-Gaussian 2-D KDE with a Silverman bandwidth per dimension.
DensityGrid kde2d(const VecRef& x, const VecRef& y, double x_lo, double x_hi, double y_lo,
                  double y_hi, int points = 40);

}  // namespace simm::stats
