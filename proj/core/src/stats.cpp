#include "simm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "simm/error.hpp"

namespace simm::stats {

namespace {

void require_nonempty(const VecRef& x, const char* what) {
    if (x.size() == 0) {
        throw ValidationError(ValidationCode::InvalidArgument, std::string(what) + " of an empty sample");
    }
}

std::vector<double> sorted_copy(const VecRef& x) {
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    return v;
}

double sorted_quantile(const std::vector<double>& v, double prob) {
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double mean(const VecRef& x) {
    require_nonempty(x, "mean");
    return x.mean();
}

double sd(const VecRef& x) {
    if (x.size() < 2) return 0.0;
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size() - 1));
}

double quantile(const VecRef& x, double prob) {
    require_nonempty(x, "quantile");
    if (!(prob >= 0.0 && prob <= 1.0)) {
        throw ValidationError(ValidationCode::InvalidArgument, "quantile level must lie in [0, 1]");
    }
    return sorted_quantile(sorted_copy(x), prob);
}

std::vector<double> quantiles(const VecRef& x, const std::vector<double>& probs) {
    require_nonempty(x, "quantiles");
    const auto v = sorted_copy(x);
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError(ValidationCode::InvalidArgument, "quantile level must lie in [0, 1]");
        }
        out.push_back(sorted_quantile(v, p));
    }
    return out;
}

double pearson(const VecRef& x, const VecRef& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError(ValidationCode::DimensionMismatch, "pearson needs two equal samples of size >= 2");
    }
    const Eigen::ArrayXd dx = x.array() - x.mean();
    const Eigen::ArrayXd dy = y.array() - y.mean();
    const double denom = std::sqrt(dx.square().sum() * dy.square().sum());
    if (denom == 0.0) return 0.0;
    return std::clamp((dx * dy).sum() / denom, -1.0, 1.0);
}

Matrix correlation_matrix(const Matrix& draws) {
    const Index k = draws.cols();
    Matrix r = Matrix::Identity(k, k);
    for (Index a = 0; a < k; ++a) {
        for (Index b = a + 1; b < k; ++b) {
            r(a, b) = r(b, a) = pearson(draws.col(a), draws.col(b));
        }
    }
    return r;
}

BoxplotStats boxplot(const VecRef& x) {
    require_nonempty(x, "boxplot");
    const auto v = sorted_copy(x);
    BoxplotStats b;
    b.q1 = sorted_quantile(v, 0.25);
    b.median = sorted_quantile(v, 0.5);
    b.q3 = sorted_quantile(v, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.lower_whisker = b.q1;
    b.upper_whisker = b.q3;
    for (double value : v) {
        if (value < lo_fence || value > hi_fence) {
            b.outliers.push_back(value);
        } else {
            b.lower_whisker = std::min(b.lower_whisker, value);
            b.upper_whisker = std::max(b.upper_whisker, value);
        }
    }
    return b;
}

double silverman_bandwidth(const VecRef& x) {
    require_nonempty(x, "bandwidth");
    const double s = sd(x);
    const auto v = sorted_copy(x);
    const double iqr = sorted_quantile(v, 0.75) - sorted_quantile(v, 0.25);
    double spread = s;
    if (iqr > 0.0) spread = std::min(s, iqr / 1.34);
    if (!(spread > 0.0)) spread = std::max(std::abs(v.front()) * 1e-3, 1e-6);
    return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

DensityCurve kde(const VecRef& x, double lo, double hi, int points) {
    DensityCurve out;
    out.bandwidth = silverman_bandwidth(x);
    const double h = out.bandwidth;
    const double norm = 1.0 / (static_cast<double>(x.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (int i = 0; i < points; ++i) {
        const double at = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
        const double dens = ((x.array() - at) / h).square().unaryExpr([](double u) { return std::exp(-0.5 * u); }).sum();
        out.x.push_back(at);
        out.density.push_back(dens * norm);
    }
    return out;
}

Histogram histogram(const VecRef& x, double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) {
        throw ValidationError(ValidationCode::InvalidArgument, "histogram needs bins >= 1 and hi > lo");
    }
    Histogram h;
    for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * i / bins);
    h.counts.assign(static_cast<std::size_t>(bins), 0.0);
    for (Index i = 0; i < x.size(); ++i) {
        if (x(i) < lo || x(i) > hi) continue;
        auto bin = static_cast<int>((x(i) - lo) / (hi - lo) * bins);
        bin = std::clamp(bin, 0, bins - 1);
        h.counts[static_cast<std::size_t>(bin)] += 1.0;
    }
    return h;
}

DensityGrid kde2d(const VecRef& x, const VecRef& y, double x_lo, double x_hi, double y_lo,
                  double y_hi, int points) {
    if (x.size() != y.size()) {
        throw ValidationError(ValidationCode::DimensionMismatch, "kde2d needs paired samples");
    }
    const double hx = silverman_bandwidth(x);
    const double hy = silverman_bandwidth(y);
    DensityGrid g;
    for (int i = 0; i < points; ++i) {
        g.x.push_back(x_lo + (x_hi - x_lo) * i / (points - 1));
        g.y.push_back(y_lo + (y_hi - y_lo) * i / (points - 1));
    }
    g.z = Matrix::Zero(points, points);
    const double norm = 1.0 / (static_cast<double>(x.size()) * 2.0 * std::numbers::pi * hx * hy);
    // Separable kernel: z = Kx * Ky^T.
    Matrix kx(points, x.size()), ky(points, y.size());
    for (int i = 0; i < points; ++i) {
        kx.row(i) = ((x.array() - g.x[static_cast<std::size_t>(i)]) / hx).square().unaryExpr([](double u) { return std::exp(-0.5 * u); }).transpose();
        ky.row(i) = ((y.array() - g.y[static_cast<std::size_t>(i)]) / hy).square().unaryExpr([](double u) { return std::exp(-0.5 * u); }).transpose();
    }
    g.z = (kx * ky.transpose()) * norm;
    return g;
}

}  // namespace simm::stats
