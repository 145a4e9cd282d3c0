#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simm/controls.hpp"
#include "simm/model.hpp"

namespace simm {

enum class Backend { Mcmc, Ffvb };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);

/// One row of the variational optimizer trace.
struct TraceRow {
    int iteration = 0;
    double lower_bound = 0.0;
    std::optional<double> moving_average;
    int patience = 0;
};

/// Retained draws for one group. Row r of p, sigma and deviance belong to
/// the same draw; chain[r] is its chain id (always 0 for variational fits).
struct GroupDraws {
    std::string name;
    Matrix p;        // n_draws x K
    Matrix sigma;    // n_draws x J
    Vector deviance; // n_draws
    std::vector<int> chain;
    bool solo = false;
    std::vector<double> acceptance;  // per Metropolis block, MCMC only
    std::vector<TraceRow> trace;     // FFVB only
    int iterations = 0;              // FFVB iterations run

    Index n_draws() const { return p.rows(); }
    int n_chains() const;
};

struct PosteriorOutput {
    Backend backend = Backend::Mcmc;
    SimmInput input;
    Priors priors;
    std::optional<McmcControl> mcmc_control;
    std::optional<FfvbControl> ffvb_control;
    std::uint64_t seed = kDefaultSeed;
    /// Column labels of p; differ from input.source_names() after combining.
    std::vector<std::string> source_names;
    /// Output column -> original source indices summed into it.
    std::vector<std::vector<Index>> source_map;
    std::vector<GroupDraws> groups;
    std::vector<std::string> warnings;

    const std::vector<std::string>& tracer_names() const { return input.tracer_names(); }
    bool is_combined() const;
    std::size_t group_index(const std::string& name) const;
    const GroupDraws& group(std::size_t g) const;
    Index source_column(const std::string& name) const;
};

/// Identity source map for K sources.
std::vector<std::vector<Index>> identity_source_map(Index n_sources);

/// Throws Error if any p draw leaves the simplex, any sigma draw is not
/// positive, or container shapes disagree.
void check_draws(const PosteriorOutput& output);

}  // namespace simm
