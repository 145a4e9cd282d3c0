#include "simm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "simm/csv.hpp"
#include "simm/error.hpp"
#include "simm/mcmc.hpp"

namespace simm {

namespace {

std::string sd_label(const std::string& tracer) { return "sd[" + tracer + "]"; }

std::string percent_label(double prob) {
    std::ostringstream os;
    os << prob * 100.0 << '%';
    return os.str();
}

// Monitored quantities in print order: deviance, proportions, sd[tracer].
std::pair<std::vector<std::string>, Matrix> monitored(const PosteriorOutput& output,
                                                      const GroupDraws& g) {
    std::vector<std::string> labels{"deviance"};
    labels.insert(labels.end(), output.source_names.begin(), output.source_names.end());
    for (const auto& t : output.tracer_names()) labels.push_back(sd_label(t));
    Matrix m(g.n_draws(), 1 + g.p.cols() + g.sigma.cols());
    m << g.deviance, g.p, g.sigma;
    return {labels, m};
}

double greater_fraction(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    if (a.size() == 0) return 0.0;
    return static_cast<double>((a.array() > b.array()).count()) / static_cast<double>(a.size());
}

std::pair<double, double> unit_range(const Matrix& m) {
    double lo = m.minCoeff();
    double hi = m.maxCoeff();
    if (!(hi > lo)) {
        lo -= 0.05;
        hi += 0.05;
    }
    return {std::max(0.0, lo), std::min(1.0, hi)};
}

}  // namespace

SummaryType summary_type_from_string(std::string_view name) {
    if (name == "diagnostics") return SummaryType::Diagnostics;
    if (name == "statistics") return SummaryType::Statistics;
    if (name == "quantiles") return SummaryType::Quantiles;
    if (name == "correlations") return SummaryType::Correlations;
    throw ValidationError(ValidationCode::InvalidArgument,
                          "unknown summary type '" + std::string(name) +
                              "' (expected diagnostics, statistics, quantiles or correlations)");
}

std::string SummaryTable::to_text(int precision) const {
    std::vector<std::vector<std::string>> cells(row_labels.size());
    std::size_t width = 0;
    for (const auto& c : col_labels) width = std::max(width, c.size());
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) {
            std::ostringstream os;
            os << std::fixed << std::setprecision(precision) << values(static_cast<Index>(r), c);
            cells[r].push_back(os.str());
            width = std::max(width, cells[r].back().size());
        }
    }
    std::size_t label_width = 0;
    for (const auto& l : row_labels) label_width = std::max(label_width, l.size());

    std::ostringstream os;
    if (!title.empty()) os << title << '\n';
    os << std::string(label_width, ' ');
    for (const auto& c : col_labels) os << ' ' << std::setw(static_cast<int>(width)) << c;
    os << '\n';
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        os << std::left << std::setw(static_cast<int>(label_width)) << row_labels[r] << std::right;
        for (const auto& cell : cells[r]) os << ' ' << std::setw(static_cast<int>(width)) << cell;
        os << '\n';
    }
    return os.str();
}

std::string SummaryTable::to_csv() const {
    std::vector<std::string> header{""};
    header.insert(header.end(), col_labels.begin(), col_labels.end());
    std::string out = csv::join(header) + '\n';
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        std::vector<std::string> fields{row_labels[r]};
        for (Index c = 0; c < values.cols(); ++c) {
            fields.push_back(csv::format_double(values(static_cast<Index>(r), c)));
        }
        out += csv::join(fields) + '\n';
    }
    return out;
}

SummaryTable summarize(const PosteriorOutput& output, SummaryType type, std::size_t group) {
    const GroupDraws& g = output.group(group);
    SummaryTable table;
    table.title = "Summary for " + g.name;

    switch (type) {
        case SummaryType::Diagnostics: {
            const auto rhat = gelman_rubin(output, group);
            table.col_labels = {"Rhat"};
            table.values.resize(static_cast<Index>(rhat.size()), 1);
            for (std::size_t i = 0; i < rhat.size(); ++i) {
                table.row_labels.push_back(rhat[i].first);
                table.values(static_cast<Index>(i), 0) = rhat[i].second;
            }
            break;
        }
        case SummaryType::Statistics: {
            auto [labels, m] = monitored(output, g);
            table.row_labels = labels;
            table.col_labels = {"mean", "sd"};
            table.values.resize(m.cols(), 2);
            for (Index c = 0; c < m.cols(); ++c) {
                table.values(c, 0) = stats::mean(m.col(c));
                table.values(c, 1) = stats::sd(m.col(c));
            }
            break;
        }
        case SummaryType::Quantiles: {
            auto [labels, m] = monitored(output, g);
            table.row_labels = labels;
            for (double q : kSummaryQuantiles) table.col_labels.push_back(percent_label(q));
            table.values.resize(m.cols(), static_cast<Index>(kSummaryQuantiles.size()));
            for (Index c = 0; c < m.cols(); ++c) {
                const auto q = stats::quantiles(m.col(c), kSummaryQuantiles);
                for (std::size_t i = 0; i < q.size(); ++i) table.values(c, static_cast<Index>(i)) = q[i];
            }
            break;
        }
        case SummaryType::Correlations: {
            table.row_labels = output.source_names;
            table.col_labels = output.source_names;
            table.values = stats::correlation_matrix(g.p);
            break;
        }
    }
    return table;
}

std::string Comparison::to_text() const {
    std::ostringstream os;
    for (const auto& p : pairs) {
        os << "Prob ( " << p.first << " > " << p.second << " ) = " << p.probability << '\n';
    }
    return os.str();
}

Comparison compare_groups(const PosteriorOutput& output, const std::string& source,
                          const std::vector<std::size_t>& groups) {
    if (output.groups.size() < 2) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "output has a single group; use compare_sources to compare "
                              "sources within a group");
    }
    if (groups.size() < 2) {
        throw ValidationError(ValidationCode::InvalidArgument, "compare_groups needs at least 2 groups");
    }
    const Index col = output.source_column(source);
    Index common = std::numeric_limits<Index>::max();
    for (auto g : groups) common = std::min(common, output.group(g).n_draws());

    Comparison cmp;
    std::vector<Vector> draws;
    for (auto g : groups) {
        const GroupDraws& gd = output.group(g);
        cmp.labels.push_back(gd.name);
        draws.push_back(gd.p.col(col).head(common));
        cmp.boxes.push_back(stats::boxplot(gd.p.col(col)));
    }
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            cmp.pairs.push_back({"proportion of " + source + " in group " + cmp.labels[a],
                                 "proportion of " + source + " in group " + cmp.labels[b],
                                 greater_fraction(draws[a], draws[b])});
        }
    }
    return cmp;
}

Comparison compare_sources(const PosteriorOutput& output, const std::vector<std::string>& sources,
                           std::size_t group) {
    if (sources.size() < 2) {
        throw ValidationError(ValidationCode::InvalidArgument, "compare_sources needs at least 2 sources");
    }
    const GroupDraws& g = output.group(group);
    std::vector<Index> cols;
    for (const auto& s : sources) cols.push_back(output.source_column(s));

    Comparison cmp;
    cmp.labels = sources;
    for (Index c : cols) cmp.boxes.push_back(stats::boxplot(g.p.col(c)));
    for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = a + 1; b < cols.size(); ++b) {
            cmp.pairs.push_back({"proportion of " + sources[a], "proportion of " + sources[b],
                                 greater_fraction(g.p.col(cols[a]), g.p.col(cols[b]))});
        }
    }
    return cmp;
}

PosteriorOutput combine_sources(const PosteriorOutput& output, const std::vector<std::string>& names,
                                const std::string& new_name) {
    if (names.size() < 2) {
        throw ValidationError(ValidationCode::InvalidArgument, "combine_sources needs at least 2 source names");
    }
    std::set<Index> combined;
    for (const auto& n : names) {
        if (!combined.insert(output.source_column(n)).second) {
            throw ValidationError(ValidationCode::DuplicateName, "source '" + n + "' listed twice");
        }
    }
    const auto k = static_cast<Index>(output.source_names.size());
    if (static_cast<Index>(combined.size()) == k) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "cannot combine every source; nothing would be left to compare");
    }
    for (Index c = 0; c < k; ++c) {
        if (!combined.count(c) && output.source_names[static_cast<std::size_t>(c)] == new_name) {
            throw ValidationError(ValidationCode::DuplicateName,
                                  "new source name '" + new_name + "' clashes with a remaining source");
        }
    }

    const Index target = *combined.begin();
    std::vector<Index> keep;  // output column order, -1 marks the combined column
    for (Index c = 0; c < k; ++c) {
        if (c == target) keep.push_back(-1);
        else if (!combined.count(c)) keep.push_back(c);
    }

    PosteriorOutput out = output;
    out.source_names.clear();
    out.source_map.clear();
    for (Index c : keep) {
        if (c < 0) {
            out.source_names.push_back(new_name);
            std::vector<Index> originals;
            for (Index m : combined) {
                const auto& src = output.source_map[static_cast<std::size_t>(m)];
                originals.insert(originals.end(), src.begin(), src.end());
            }
            std::sort(originals.begin(), originals.end());
            out.source_map.push_back(originals);
        } else {
            out.source_names.push_back(output.source_names[static_cast<std::size_t>(c)]);
            out.source_map.push_back(output.source_map[static_cast<std::size_t>(c)]);
        }
    }
    for (std::size_t g = 0; g < out.groups.size(); ++g) {
        const Matrix& p = output.groups[g].p;
        Matrix np(p.rows(), static_cast<Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (keep[i] < 0) {
                np.col(static_cast<Index>(i)).setZero();
                for (Index m : combined) np.col(static_cast<Index>(i)) += p.col(m);
            } else {
                np.col(static_cast<Index>(i)) = p.col(keep[i]);
            }
        }
        out.groups[g].p = std::move(np);
    }
    return out;
}

Matrix sample_prior_proportions(const Priors& priors, int n, Rng& rng) {
    const Index k = priors.mu0.size();
    const Eigen::LLT<Matrix> llt(priors.sigma0);
    const Matrix L = llt.matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(n, k);
    Vector z(k);
    for (int r = 0; r < n; ++r) {
        for (Index i = 0; i < k; ++i) z(i) = normal(rng);
        out.row(r) = clr_inverse(priors.mu0 + L * z).transpose();
    }
    return out;
}

namespace {

Matrix apply_source_map(const Matrix& p, const std::vector<std::vector<Index>>& map) {
    Matrix out = Matrix::Zero(p.rows(), static_cast<Index>(map.size()));
    for (std::size_t c = 0; c < map.size(); ++c) {
        for (Index src : map[c]) out.col(static_cast<Index>(c)) += p.col(src);
    }
    return out;
}

constexpr std::uint64_t kPriorStream = 0x70726f72ULL;

}  // namespace

PriorVizData prior_viz_data(const PosteriorOutput& output, std::size_t group, int n_prior_draws,
                            std::uint64_t seed) {
    if (n_prior_draws < 2) {
        throw ValidationError(ValidationCode::InvalidArgument, "n_prior_draws must be >= 2");
    }
    const GroupDraws& g = output.group(group);
    Rng rng = make_rng(seed, {kPriorStream});
    PriorVizData data;
    data.group = g.name;
    data.sources = output.source_names;
    data.prior = apply_source_map(sample_prior_proportions(output.priors, n_prior_draws, rng),
                                  output.source_map);
    data.posterior = g.p;
    for (Index c = 0; c < data.prior.cols(); ++c) {
        data.prior_density.push_back(stats::kde(data.prior.col(c), 0.0, 1.0));
        data.posterior_density.push_back(stats::kde(data.posterior.col(c), 0.0, 1.0));
    }
    return data;
}

std::string PriorVizData::to_csv() const {
    std::string out = "source,kind,x,density\n";
    for (std::size_t s = 0; s < sources.size(); ++s) {
        for (const auto& [kind, curves] : {std::pair{"prior", &prior_density}, std::pair{"posterior", &posterior_density}}) {
            const auto& c = (*curves)[s];
            for (std::size_t i = 0; i < c.x.size(); ++i) {
                out += csv::join({sources[s], kind, csv::format_double(c.x[i]), csv::format_double(c.density[i])}) + '\n';
            }
        }
    }
    return out;
}

PredictiveCheck posterior_predictive(const PosteriorOutput& output, const SimmInput& input,
                                     std::size_t group, double prob_interval, std::uint64_t seed) {
    if (!(prob_interval > 0.0 && prob_interval < 1.0)) {
        throw ValidationError(ValidationCode::InvalidArgument, "prob_interval must lie in (0, 1)");
    }
    if (output.is_combined()) {
        throw UnsupportedError("posterior_predictive needs the original sources; "
                               "run it before combine_sources");
    }
    const GroupDraws& g = output.group(group);
    const auto in_group = input.find_group(g.name);
    if (!in_group) {
        throw ValidationError(ValidationCode::UnknownGroup, "group '" + g.name + "' is not in the input");
    }
    const Matrix& y = input.group_mixtures(*in_group);
    const auto& rows = input.group_rows(*in_group);
    const Index n = y.rows();
    const Index J = input.n_tracers();

    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(group), 0x70706364ULL});
    std::normal_distribution<double> normal(0.0, 1.0);
    PredictiveCheck check;
    check.group = g.name;
    check.prob_interval = prob_interval;
    check.replicates.resize(g.n_draws(), n * J);
    for (Index d = 0; d < g.n_draws(); ++d) {
        const Vector p = g.p.row(d).transpose();
        for (Index j = 0; j < J; ++j) {
            const MixtureMoments m = mixture_moments(p, input, j);
            const double sd = std::sqrt(m.pre_residual_variance + g.sigma(d, j) * g.sigma(d, j));
            for (Index i = 0; i < n; ++i) check.replicates(d, i * J + j) = m.mean + sd * normal(rng);
        }
    }

    const double lo_q = 0.5 - prob_interval / 2.0;
    const double hi_q = 0.5 + prob_interval / 2.0;
    Index inside = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < J; ++j) {
            const auto q = stats::quantiles(check.replicates.col(i * J + j), {lo_q, hi_q});
            PredictiveRow row{rows[static_cast<std::size_t>(i)], j, y(i, j), q[0], q[1], false};
            row.inside = row.observed >= row.lower && row.observed <= row.upper;
            inside += row.inside ? 1 : 0;
            check.rows.push_back(row);
        }
    }
    check.coverage = static_cast<double>(inside) / static_cast<double>(check.rows.size());
    return check;
}

std::string PredictiveCheck::to_csv(const std::vector<std::string>& tracer_names) const {
    std::string out = "observation,tracer,observed,lower,upper,inside\n";
    for (const auto& r : rows) {
        out += csv::join({std::to_string(r.observation + 1), tracer_names.at(static_cast<std::size_t>(r.tracer)),
                          csv::format_double(r.observed), csv::format_double(r.lower),
                          csv::format_double(r.upper), r.inside ? "true" : "false"}) +
               '\n';
    }
    return out;
}

BoxplotData boxplot_data(const PosteriorOutput& output, std::size_t group) {
    const GroupDraws& g = output.group(group);
    BoxplotData data;
    data.title = "Posterior proportions, group " + g.name;
    data.labels = output.source_names;
    for (Index c = 0; c < g.p.cols(); ++c) data.boxes.push_back(stats::boxplot(g.p.col(c)));
    return data;
}

BoxplotData boxplot_data(const Comparison& comparison, const std::string& title) {
    return {title, comparison.labels, comparison.boxes};
}

std::string BoxplotData::to_csv() const {
    std::string out = "label,lower_whisker,q1,median,q3,upper_whisker,n_outliers\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& b = boxes[i];
        out += csv::join({labels[i], csv::format_double(b.lower_whisker), csv::format_double(b.q1),
                          csv::format_double(b.median), csv::format_double(b.q3),
                          csv::format_double(b.upper_whisker), std::to_string(b.outliers.size())}) +
               '\n';
    }
    return out;
}

DensityPlotData density_data(const PosteriorOutput& output, std::size_t group) {
    const GroupDraws& g = output.group(group);
    DensityPlotData data;
    data.title = "Posterior densities, group " + g.name;
    data.labels = output.source_names;
    for (Index c = 0; c < g.p.cols(); ++c) data.curves.push_back(stats::kde(g.p.col(c), 0.0, 1.0));
    return data;
}

std::string DensityPlotData::to_csv() const {
    std::string out = "label,x,density\n";
    for (std::size_t s = 0; s < labels.size(); ++s) {
        for (std::size_t i = 0; i < curves[s].x.size(); ++i) {
            out += csv::join({labels[s], csv::format_double(curves[s].x[i]),
                              csv::format_double(curves[s].density[i])}) +
                   '\n';
        }
    }
    return out;
}

MatrixPlotData matrix_plot_data(const PosteriorOutput& output, std::size_t group, int bins, int grid) {
    const GroupDraws& g = output.group(group);
    MatrixPlotData data;
    data.title = "Posterior matrix plot, group " + g.name;
    data.labels = output.source_names;
    const Index k = g.p.cols();
    for (Index a = 0; a < k; ++a) {
        auto [lo, hi] = unit_range(g.p.col(a));
        data.histograms.push_back(stats::histogram(g.p.col(a), lo, hi, bins));
    }
    for (Index a = 0; a < k; ++a) {
        for (Index b = a + 1; b < k; ++b) {
            auto [xlo, xhi] = unit_range(g.p.col(a));
            auto [ylo, yhi] = unit_range(g.p.col(b));
            data.contours.push_back(stats::kde2d(g.p.col(a), g.p.col(b), xlo, xhi, ylo, yhi, grid));
        }
    }
    data.correlations = stats::correlation_matrix(g.p);
    return data;
}

std::string MatrixPlotData::to_csv() const {
    std::string out = "panel,row,col,x,y,value\n";
    const auto k = labels.size();
    for (std::size_t a = 0; a < k; ++a) {
        const auto& h = histograms[a];
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            const double mid = 0.5 * (h.edges[i] + h.edges[i + 1]);
            out += csv::join({"histogram", labels[a], labels[a], csv::format_double(mid), "",
                              csv::format_double(h.counts[i])}) + '\n';
        }
    }
    std::size_t pair = 0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b, ++pair) {
            const auto& grid = contours[pair];
            for (std::size_t i = 0; i < grid.x.size(); ++i) {
                for (std::size_t j = 0; j < grid.y.size(); ++j) {
                    out += csv::join({"contour", labels[a], labels[b], csv::format_double(grid.x[i]),
                                      csv::format_double(grid.y[j]),
                                      csv::format_double(grid.z(static_cast<Index>(i), static_cast<Index>(j)))}) + '\n';
                }
            }
            out += csv::join({"correlation", labels[b], labels[a], "", "",
                              csv::format_double(correlations(static_cast<Index>(a), static_cast<Index>(b)))}) + '\n';
        }
    }
    return out;
}

}  // namespace simm
