#include "simm/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace simm::plot {

namespace {

const char* const kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                "#66a61e", "#e6ab02", "#a6761d", "#666666"};

const char* colour(std::size_t i) { return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))]; }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Range padded(double frac = 0.05) const {
        double span = hi - lo;
        if (!(span > 0)) span = std::max(1.0, std::abs(hi));
        return {lo - frac * span, hi + frac * span};
    }
};

Range empty_range() {
    return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
}

// A rectangular plotting panel inside the document.
struct Panel {
    double left, top, width, height;
    Range x, y;

    double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * width; }
    double py(double v) const { return top + height - (v - y.lo) / (y.hi - y.lo) * height; }
};

class Svg {
public:
    Svg(double w, double h) : w_(w), h_(h) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
        body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\""
              << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke) {
        body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\""
              << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\""
              << fill << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.5, const std::string& dash = {}) {
        body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"";
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
        body_ << " points=\"";
        for (const auto& [x, y] : pts) body_ << num(x) << ',' << num(y) << ' ';
        body_ << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& anchor = "middle",
              double size = 12, double rotate = 0) {
        body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
              << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
        if (rotate != 0) body_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
        body_ << '>' << xml_escape(s) << "</text>\n";
    }

    void axes(const Panel& p, const std::string& xlab, const std::string& ylab, bool y_ticks = true) {
        rect(p.left, p.top, p.width, p.height, "none", "#333333");
        for (int i = 0; i <= 4; ++i) {
            const double xv = p.x.lo + (p.x.hi - p.x.lo) * i / 4.0;
            const double xx = p.px(xv);
            line(xx, p.top + p.height, xx, p.top + p.height + 4, "#333333");
            text(xx, p.top + p.height + 16, num(std::round(xv * 1000) / 1000), "middle", 10);
            if (!y_ticks) continue;
            const double yv = p.y.lo + (p.y.hi - p.y.lo) * i / 4.0;
            const double yy = p.py(yv);
            line(p.left - 4, yy, p.left, yy, "#333333");
            text(p.left - 6, yy + 3, num(std::round(yv * 1000) / 1000), "end", 10);
        }
        if (!xlab.empty()) text(p.left + p.width / 2, p.top + p.height + 34, xlab);
        if (!ylab.empty()) text(p.left - 42, p.top + p.height / 2, ylab, "middle", 12, -90);
    }

    std::string str() const {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
           << "\" viewBox=\"0 0 " << num(w_) << ' ' << num(h_) << "\">\n"
           << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           << body_.str() << "</svg>\n";
        return os.str();
    }

private:
    double w_, h_;
    std::ostringstream body_;
};

void legend(Svg& svg, double x, double y, const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double yy = y + 16.0 * static_cast<double>(i);
        svg.rect(x, yy - 9, 10, 10, colour(i), "none");
        svg.text(x + 14, yy, labels[i], "start", 11);
    }
}

std::vector<std::pair<double, double>> curve_points(const Panel& p, const stats::DensityCurve& c) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < c.x.size(); ++i) pts.emplace_back(p.px(c.x[i]), p.py(c.density[i]));
    return pts;
}

// Position of pair (a, b), a < b, in row-major upper-triangle order.
std::size_t pair_index(std::size_t a, std::size_t b, std::size_t k) {
    return a * k - a * (a + 1) / 2 + (b - a - 1);
}

}  // namespace

std::string isospace_svg(const IsospacePlotData& data) {
    Svg svg(640, 480);
    Range xr = empty_range(), yr = empty_range();
    for (const auto& m : data.mixtures) {
        xr.include(m.x);
        yr.include(m.y);
    }
    for (const auto& s : data.sources) {
        xr.include(s.x - s.x_spread);
        xr.include(s.x + s.x_spread);
        yr.include(s.y - s.y_spread);
        yr.include(s.y + s.y_spread);
    }
    Panel p{70, 30, 420, 380, xr.padded(), yr.padded()};
    svg.axes(p, data.x_label, data.y_label, !data.one_dimensional);

    std::vector<std::string> groups;
    for (const auto& m : data.mixtures) {
        auto it = std::find(groups.begin(), groups.end(), m.group);
        if (it == groups.end()) {
            groups.push_back(m.group);
            it = groups.end() - 1;
        }
        svg.circle(p.px(m.x), p.py(m.y), 3.5, colour(static_cast<std::size_t>(it - groups.begin())));
    }
    for (const auto& s : data.sources) {
        const double cx = p.px(s.x), cy = p.py(s.y);
        svg.line(p.px(s.x - s.x_spread), cy, p.px(s.x + s.x_spread), cy, "#000000", 1.5);
        if (s.y_spread > 0) svg.line(cx, p.py(s.y - s.y_spread), cx, p.py(s.y + s.y_spread), "#000000", 1.5);
        svg.rect(cx - 4, cy - 4, 8, 8, "#000000", "none");
        svg.text(cx + 6, cy - 6, s.name, "start", 12);
    }
    std::vector<std::string> labels;
    for (const auto& g : groups) labels.push_back("group " + g);
    legend(svg, 510, 50, labels);
    return svg.str();
}

std::string boxplot_svg(const BoxplotData& data) {
    const double width = std::max(320.0, 90.0 * static_cast<double>(data.labels.size()) + 100);
    Svg svg(width, 420);
    Range yr = empty_range();
    for (const auto& b : data.boxes) {
        yr.include(b.lower_whisker);
        yr.include(b.upper_whisker);
        for (double o : b.outliers) yr.include(o);
    }
    Panel p{70, 40, width - 100, 320, {0, static_cast<double>(data.labels.size())}, yr.padded()};
    svg.text(width / 2, 22, data.title);
    svg.rect(p.left, p.top, p.width, p.height, "none", "#333333");
    for (int i = 0; i <= 4; ++i) {
        const double yv = p.y.lo + (p.y.hi - p.y.lo) * i / 4.0;
        svg.line(p.left - 4, p.py(yv), p.left, p.py(yv), "#333333");
        svg.text(p.left - 6, p.py(yv) + 3, num(std::round(yv * 1000) / 1000), "end", 10);
    }
    svg.text(p.left - 46, p.top + p.height / 2, "proportion", "middle", 12, -90);
    for (std::size_t i = 0; i < data.boxes.size(); ++i) {
        const auto& b = data.boxes[i];
        const double cx = p.px(static_cast<double>(i) + 0.5);
        const double half = p.width / static_cast<double>(data.labels.size()) * 0.3;
        svg.line(cx, p.py(b.lower_whisker), cx, p.py(b.q1), "#333333");
        svg.line(cx, p.py(b.q3), cx, p.py(b.upper_whisker), "#333333");
        svg.rect(cx - half, p.py(b.q3), 2 * half, p.py(b.q1) - p.py(b.q3), colour(i), "#333333");
        svg.line(cx - half, p.py(b.median), cx + half, p.py(b.median), "#000000", 2);
        for (double o : b.outliers) svg.circle(cx, p.py(o), 1.5, "#333333");
        svg.text(cx, p.top + p.height + 16, data.labels[i], "middle", 11);
    }
    return svg.str();
}

std::string density_svg(const DensityPlotData& data) {
    Svg svg(640, 420);
    Range yr{0, 0};
    for (const auto& c : data.curves)
        for (double d : c.density) yr.include(d);
    Panel p{70, 40, 420, 320, {0, 1}, {0, yr.hi * 1.05 + 1e-12}};
    svg.text(320, 22, data.title);
    svg.axes(p, "proportion", "density");
    for (std::size_t i = 0; i < data.curves.size(); ++i) svg.polyline(curve_points(p, data.curves[i]), colour(i));
    legend(svg, 510, 60, data.labels);
    return svg.str();
}

std::string prior_svg(const PriorVizData& data) {
    const std::size_t k = data.sources.size();
    const double panel_w = 200;
    const double width = 60 + (panel_w + 30) * static_cast<double>(k);
    Svg svg(width, 340);
    svg.text(width / 2, 22, "Prior (dashed) and posterior (solid), group " + data.group);
    for (std::size_t s = 0; s < k; ++s) {
        double top = 0;
        for (double d : data.prior_density[s].density) top = std::max(top, d);
        for (double d : data.posterior_density[s].density) top = std::max(top, d);
        Panel p{60 + (panel_w + 30) * static_cast<double>(s), 50, panel_w, 220, {0, 1}, {0, top * 1.05 + 1e-12}};
        svg.axes(p, data.sources[s], s == 0 ? "density" : "");
        svg.polyline(curve_points(p, data.prior_density[s]), "#888888", 1.5, "5,4");
        svg.polyline(curve_points(p, data.posterior_density[s]), colour(s));
    }
    return svg.str();
}

std::string matrix_svg(const MatrixPlotData& data) {
    const std::size_t k = data.labels.size();
    const double cell = 150;
    const double margin = 50;
    const double size = margin + cell * static_cast<double>(k) + 20;
    Svg svg(size, size + 20);
    svg.text(size / 2, 22, data.title);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            const double left = margin + cell * static_cast<double>(b) + 8;
            const double top = margin + cell * static_cast<double>(a) + 8;
            const double inner = cell - 16;
            if (a == b) {
                const auto& h = data.histograms[a];
                double peak = 0;
                for (double c : h.counts) peak = std::max(peak, c);
                Panel p{left, top, inner, inner, {h.edges.front(), h.edges.back()}, {0, peak > 0 ? peak : 1}};
                svg.rect(left, top, inner, inner, "none", "#333333");
                for (std::size_t i = 0; i < h.counts.size(); ++i) {
                    const double x0 = p.px(h.edges[i]), x1 = p.px(h.edges[i + 1]);
                    svg.rect(x0, p.py(h.counts[i]), x1 - x0, p.py(0) - p.py(h.counts[i]), colour(a), "none");
                }
                svg.text(left + inner / 2, top + 12, data.labels[a], "middle", 11);
            } else if (a < b) {
                // upper triangle: density grid rendered as shaded cells
                const auto& g = data.contours[pair_index(a, b, k)];
                const double peak = g.z.maxCoeff() > 0 ? g.z.maxCoeff() : 1;
                const double cw = inner / static_cast<double>(g.x.size());
                const double ch = inner / static_cast<double>(g.y.size());
                svg.rect(left, top, inner, inner, "none", "#333333");
                for (std::size_t i = 0; i < g.x.size(); ++i) {
                    for (std::size_t j = 0; j < g.y.size(); ++j) {
                        const double level = g.z(static_cast<Index>(i), static_cast<Index>(j)) / peak;
                        if (level < 0.05) continue;
                        const int shade = static_cast<int>(255 - 200 * level);
                        svg.rect(left + cw * static_cast<double>(i), top + inner - ch * static_cast<double>(j + 1),
                                 cw, ch, "rgb(" + std::to_string(shade) + "," + std::to_string(shade) + ",255)",
                                 "none");
                    }
                }
            } else {
                svg.rect(left, top, inner, inner, "none", "#cccccc");
                svg.text(left + inner / 2, top + inner / 2 + 6,
                         num(std::round(data.correlations(static_cast<Index>(a), static_cast<Index>(b)) * 100) / 100),
                         "middle", 16);
            }
        }
    }
    return svg.str();
}

}  // namespace simm::plot
