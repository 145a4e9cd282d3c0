#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "simm/output.hpp"
#include "simm/stats.hpp"

namespace simm {

enum class SummaryType { Diagnostics, Statistics, Quantiles, Correlations };

SummaryType summary_type_from_string(std::string_view name);

/// Labelled table: one row per monitored quantity.
struct SummaryTable {
    std::string title;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Matrix values;

    std::string to_text(int precision = 3) const;
    std::string to_csv() const;
};

inline const std::vector<double> kSummaryQuantiles{0.025, 0.25, 0.5, 0.75, 0.975};

/// statistics: mean/sd of deviance, each proportion and each sd[tracer].
/// quantiles: the same rows at kSummaryQuantiles. correlations: Pearson
/// matrix of the proportion draws. diagnostics: Gelman-Rubin (MCMC only).
SummaryTable summarize(const PosteriorOutput& output, SummaryType type, std::size_t group);

struct PairProbability {
    std::string first;
    std::string second;
    /// Fraction of paired draws with first > second (ties count as not greater).
    double probability = 0.0;
};

struct Comparison {
    std::vector<std::string> labels;
    std::vector<PairProbability> pairs;
    std::vector<stats::BoxplotStats> boxes;  // one per label
    std::string to_text() const;
};

/// Compares one source's proportion across groups. Draws are paired by index
/// after truncating every group to the shortest draw count.
Comparison compare_groups(const PosteriorOutput& output, const std::string& source,
                          const std::vector<std::size_t>& groups);

/// Compares proportions of several sources within one group using the joint draws.
Comparison compare_sources(const PosteriorOutput& output, const std::vector<std::string>& sources,
                           std::size_t group);

/// Sums the named proportion columns into `new_name`, placed at the position
/// of the earliest combined column. sigma and deviance draws are untouched.
PosteriorOutput combine_sources(const PosteriorOutput& output, const std::vector<std::string>& names,
                                const std::string& new_name);

/// n draws of clr_inverse(f), f ~ MVN(mu0, sigma0); one row per draw.
Matrix sample_prior_proportions(const Priors& priors, int n, Rng& rng);

struct PriorVizData {
    std::string group;
    std::vector<std::string> sources;
    Matrix prior;      // n_prior x K'
    Matrix posterior;  // n_draws x K'
    std::vector<stats::DensityCurve> prior_density;
    std::vector<stats::DensityCurve> posterior_density;

    std::string to_csv() const;
};

/// Prior draws come from a fixed stream of `seed`, so groups sharing priors
/// get identical prior draws.
PriorVizData prior_viz_data(const PosteriorOutput& output, std::size_t group,
                            int n_prior_draws = 3600, std::uint64_t seed = kDefaultSeed);

struct PredictiveRow {
    Index observation = 0;  // row in the input mixtures
    Index tracer = 0;
    double observed = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool inside = false;
};

struct PredictiveCheck {
    std::string group;
    double prob_interval = 0.5;
    std::vector<PredictiveRow> rows;
    double coverage = 0.0;
    /// One simulated replicate per retained draw: n_draws x (n_obs * J),
    /// column = observation_in_group * J + tracer.
    Matrix replicates;

    std::string to_csv(const std::vector<std::string>& tracer_names) const;
};

PredictiveCheck posterior_predictive(const PosteriorOutput& output, const SimmInput& input,
                                     std::size_t group, double prob_interval = 0.5,
                                     std::uint64_t seed = kDefaultSeed);

/// Plot datasets for the posterior of one group.
struct BoxplotData {
    std::string title;
    std::vector<std::string> labels;
    std::vector<stats::BoxplotStats> boxes;
    std::string to_csv() const;
};

BoxplotData boxplot_data(const PosteriorOutput& output, std::size_t group);
BoxplotData boxplot_data(const Comparison& comparison, const std::string& title);

struct DensityPlotData {
    std::string title;
    std::vector<std::string> labels;
    std::vector<stats::DensityCurve> curves;
    std::string to_csv() const;
};

DensityPlotData density_data(const PosteriorOutput& output, std::size_t group);

struct MatrixPlotData {
    std::string title;
    std::vector<std::string> labels;
    std::vector<stats::Histogram> histograms;  // diagonal
    /// Upper triangle, pair (a, b) with a < b stored row-major over pairs.
    std::vector<stats::DensityGrid> contours;
    Matrix correlations;                       // lower triangle
    std::string to_csv() const;
};

MatrixPlotData matrix_plot_data(const PosteriorOutput& output, std::size_t group, int bins = 30,
                                int grid = 40);

}  // namespace simm
