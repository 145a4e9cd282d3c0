#include "simm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "simm/csv.hpp"
#include "simm/error.hpp"

namespace simm {

namespace {

constexpr double kTol = 1e-9;

const char* kMissingSourceNote =
    "note: a mixture inside the region does not prove that every contributing source is included";

double cross(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<bool> test_2d(const std::vector<Point>& sources, const std::vector<Point>& mixtures,
                          std::vector<std::string>& warnings, const std::string& where) {
    const auto hull = convex_hull(sources);
    std::vector<bool> inside;
    inside.reserve(mixtures.size());
    if (hull.size() >= 3) {
        for (const auto& m : mixtures) inside.push_back(point_in_hull(hull, m, kTol));
        return inside;
    }
    warnings.push_back("corrected sources" + where +
                       " are collinear; the mixing polygon is degenerate and mixtures are tested "
                       "against the segment joining them");
    for (const auto& m : mixtures) {
        const double d = hull.size() == 1 ? std::hypot(m[0] - hull[0][0], m[1] - hull[0][1])
                                          : segment_distance(hull[0], hull[1], m);
        inside.push_back(d <= kTol);
    }
    return inside;
}

}  // namespace

CorrectedSources corrected_sources(const SimmInput& input) {
    return {input.source_means() + input.correction_means(),
            (input.source_sds().cwiseAbs2() + input.correction_sds().cwiseAbs2()).cwiseSqrt()};
}

std::vector<Point> convex_hull(std::vector<Point> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 3) return points;
    std::vector<Point> hull(2 * points.size());
    std::size_t k = 0;
    for (const auto& p : points) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = points.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

double segment_distance(const Point& a, const Point& b, const Point& p) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
}

bool point_in_hull(const std::vector<Point>& hull, const Point& p, double tol) {
    if (hull.empty()) return false;
    if (hull.size() == 1) return std::hypot(p[0] - hull[0][0], p[1] - hull[0][1]) <= tol;
    if (hull.size() == 2) return segment_distance(hull[0], hull[1], p) <= tol;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        // signed distance of p to the left of edge a->b
        if (cross(a, b, p) / len < -tol) return false;
    }
    return true;
}

MixingRegionReport in_mixing_region(const SimmInput& input) {
    const CorrectedSources src = corrected_sources(input);
    const Matrix& y = input.mixtures();
    const Index J = input.n_tracers();
    MixingRegionReport report;

    if (J == 1) {
        const double lo = src.position.col(0).minCoeff();
        const double hi = src.position.col(0).maxCoeff();
        for (Index i = 0; i < y.rows(); ++i) {
            report.inside.push_back(y(i, 0) >= lo - kTol && y(i, 0) <= hi + kTol);
        }
    } else {
        auto project = [&](Index a, Index b, std::vector<Point>& s, std::vector<Point>& m) {
            s.clear();
            m.clear();
            for (Index k = 0; k < src.position.rows(); ++k) s.push_back({src.position(k, a), src.position(k, b)});
            for (Index i = 0; i < y.rows(); ++i) m.push_back({y(i, a), y(i, b)});
        };
        std::vector<Point> s, m;
        if (J == 2) {
            project(0, 1, s, m);
            report.inside = test_2d(s, m, report.warnings, "");
        } else {
            report.warnings.push_back(
                "more than 2 tracers: containment is checked on each tracer pair separately, which is "
                "necessary but not sufficient for lying inside the mixing region");
            report.inside.assign(static_cast<std::size_t>(y.rows()), true);
            for (Index a = 0; a < J; ++a) {
                for (Index b = a + 1; b < J; ++b) {
                    project(a, b, s, m);
                    const auto where = " on (" + input.tracer_names()[static_cast<std::size_t>(a)] + ", " +
                                       input.tracer_names()[static_cast<std::size_t>(b)] + ")";
                    auto verdict = test_2d(s, m, report.warnings, where);
                    for (std::size_t i = 0; i < verdict.size(); ++i) {
                        report.inside[i] = report.inside[i] && verdict[i];
                    }
                    report.pairs.emplace_back(a, b);
                    report.pair_inside.push_back(std::move(verdict));
                }
            }
        }
    }
    if (!report.all_inside()) {
        report.warnings.push_back("some mixtures lie outside the mixing region; a source may be missing "
                                  "or the corrections may be wrong");
    }
    return report;
}

bool MixingRegionReport::all_inside() const {
    return std::all_of(inside.begin(), inside.end(), [](bool b) { return b; });
}

std::string MixingRegionReport::to_text(const SimmInput& input) const {
    std::ostringstream os;
    const auto n_in = std::count(inside.begin(), inside.end(), true);
    os << n_in << " of " << inside.size() << " mixtures inside the mixing region\n";
    for (std::size_t i = 0; i < inside.size(); ++i) {
        if (inside[i]) continue;
        os << "  outside: mixture " << i + 1 << " (group " << input.group_labels()[i] << ")\n";
    }
    for (const auto& w : warnings) os << "warning: " << w << '\n';
    os << kMissingSourceNote << '\n';
    return os.str();
}

std::string MixingRegionReport::to_json(const SimmInput& input) const {
    nlohmann::json j;
    j["all_inside"] = all_inside();
    auto& rows = j["mixtures"] = nlohmann::json::array();
    for (std::size_t i = 0; i < inside.size(); ++i) {
        rows.push_back({{"row", i + 1}, {"group", input.group_labels()[i]}, {"inside", static_cast<bool>(inside[i])}});
    }
    if (!pairs.empty()) {
        auto& pj = j["pairs"] = nlohmann::json::array();
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            std::vector<bool> v(pair_inside[p].begin(), pair_inside[p].end());
            pj.push_back({{"tracers", {input.tracer_names()[static_cast<std::size_t>(pairs[p].first)],
                                       input.tracer_names()[static_cast<std::size_t>(pairs[p].second)]}},
                          {"inside", v}});
        }
    }
    j["warnings"] = warnings;
    j["note"] = kMissingSourceNote;
    return j.dump(2);
}

IsospacePlotData isospace_plot_data(const SimmInput& input, const std::vector<std::string>& groups,
                                    const std::string& x_label, const std::string& y_label) {
    if (groups.empty()) {
        throw ValidationError(ValidationCode::EmptyGroup, "isospace plot needs at least one group");
    }
    const Index J = input.n_tracers();
    if (J > 2) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "isospace plots support 1 or 2 tracers, got " + std::to_string(J));
    }
    std::vector<std::size_t> ids;
    for (const auto& name : groups) {
        auto g = input.find_group(name);
        if (!g) {
            std::string valid;
            for (const auto& n : input.group_names()) valid += (valid.empty() ? "" : ", ") + n;
            throw ValidationError(ValidationCode::UnknownGroup,
                                  "group '" + name + "' not found (groups: " + valid + ")");
        }
        ids.push_back(*g);
    }

    IsospacePlotData data;
    data.one_dimensional = J == 1;
    data.x_label = x_label.empty() ? input.tracer_names()[0] : x_label;
    data.y_label = !y_label.empty() ? y_label : (J == 2 ? input.tracer_names()[1] : std::string("index"));

    const Matrix& y = input.mixtures();
    int ordinal = 0;
    for (auto g : ids) {
        for (Index row : input.group_rows(g)) {
            ++ordinal;
            data.mixtures.push_back({input.group_name(g), y(row, 0), J == 2 ? y(row, 1) : static_cast<double>(ordinal)});
        }
    }
    const CorrectedSources src = corrected_sources(input);
    const double mid = (ordinal + 1) / 2.0;
    for (Index k = 0; k < src.position.rows(); ++k) {
        data.sources.push_back({input.source_names()[static_cast<std::size_t>(k)], src.position(k, 0),
                                J == 2 ? src.position(k, 1) : mid, src.spread(k, 0),
                                J == 2 ? src.spread(k, 1) : 0.0});
    }
    return data;
}

std::string IsospacePlotData::to_csv() const {
    std::string out = "kind,label,x,y,x_spread,y_spread\n";
    for (const auto& m : mixtures) {
        out += csv::join({"mixture", m.group, csv::format_double(m.x), csv::format_double(m.y), "", ""}) + '\n';
    }
    for (const auto& s : sources) {
        out += csv::join({"source", s.name, csv::format_double(s.x), csv::format_double(s.y),
                          csv::format_double(s.x_spread), csv::format_double(s.y_spread)}) +
               '\n';
    }
    return out;
}

}  // namespace simm
