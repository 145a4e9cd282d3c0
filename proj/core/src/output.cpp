#include "simm/output.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "simm/error.hpp"

namespace simm {

namespace {

void invalid(const std::string& what) {
    throw ValidationError(ValidationCode::InvalidArgument, what);
}

}  // namespace

void McmcControl::validate() const {
    if (n_chains < 1) invalid("n_chains must be >= 1");
    if (iterations < 1) invalid("iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) invalid("burn_in must satisfy 0 <= burn_in < iterations");
    if (thin < 1) invalid("thin must be >= 1");
    if (draws_per_chain() < 1) invalid("no draws retained: (iterations - burn_in) / thin < 1");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) invalid("target_acceptance must lie in (0, 1)");
    if (adaptation_window < 1) invalid("adaptation_window must be >= 1");
}

void FfvbControl::validate() const {
    if (S < 2) invalid("S must be >= 2");
    if (!(beta1 > 0.0 && beta1 < 1.0)) invalid("beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) invalid("beta2 must lie in (0, 1)");
    if (!(eps0 > 0.0)) invalid("eps0 must be positive");
    if (!(alpha > 0.0)) invalid("alpha must be positive");
    if (t_W < 1) invalid("t_W must be >= 1");
    if (P < 1) invalid("P must be >= 1");
    if (max_iterations < 1) invalid("max_iterations must be >= 1");
    if (n_output_draws < 1) invalid("n_output_draws must be >= 1");
}

std::string_view to_string(Backend backend) {
    return backend == Backend::Mcmc ? "mcmc" : "ffvb";
}

Backend backend_from_string(std::string_view name) {
    if (name == "mcmc") return Backend::Mcmc;
    if (name == "ffvb") return Backend::Ffvb;
    throw ValidationError(ValidationCode::InvalidArgument,
                          "unknown backend '" + std::string(name) + "' (expected mcmc or ffvb)");
}

int GroupDraws::n_chains() const {
    return static_cast<int>(std::set<int>(chain.begin(), chain.end()).size());
}

bool PosteriorOutput::is_combined() const {
    return source_map != identity_source_map(input.n_sources());
}

std::size_t PosteriorOutput::group_index(const std::string& name) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].name == name) return g;
    }
    std::string valid;
    for (const auto& gr : groups) valid += (valid.empty() ? "" : ", ") + gr.name;
    throw ValidationError(ValidationCode::UnknownGroup,
                          "unknown group '" + name + "'; valid groups: " + valid);
}

const GroupDraws& PosteriorOutput::group(std::size_t g) const {
    if (g >= groups.size()) {
        throw ValidationError(ValidationCode::UnknownGroup,
                              "group index " + std::to_string(g + 1) + " out of range (" +
                                  std::to_string(groups.size()) + " groups)");
    }
    return groups[g];
}

Index PosteriorOutput::source_column(const std::string& name) const {
    auto it = std::find(source_names.begin(), source_names.end(), name);
    if (it == source_names.end()) {
        std::string valid;
        for (const auto& s : source_names) valid += (valid.empty() ? "" : ", ") + s;
        throw ValidationError(ValidationCode::UnknownSource,
                              "unknown source '" + name + "'; valid sources: " + valid);
    }
    return static_cast<Index>(it - source_names.begin());
}

std::vector<std::vector<Index>> identity_source_map(Index n_sources) {
    std::vector<std::vector<Index>> map;
    for (Index k = 0; k < n_sources; ++k) map.push_back({k});
    return map;
}

void check_draws(const PosteriorOutput& output) {
    const auto k = static_cast<Index>(output.source_names.size());
    const Index j = output.input.n_tracers();
    for (const auto& g : output.groups) {
        const Index n = g.p.rows();
        if (g.p.cols() != k || g.sigma.rows() != n || g.sigma.cols() != j ||
            g.deviance.size() != n || static_cast<Index>(g.chain.size()) != n) {
            throw Error("draw container shapes disagree for group '" + g.name + "'");
        }
        for (Index r = 0; r < n; ++r) {
            const auto row = g.p.row(r);
            if ((row.array() < 0.0).any() || std::abs(row.sum() - 1.0) > 1e-9) {
                throw Error("proportion draw " + std::to_string(r) + " of group '" + g.name +
                            "' is off the simplex");
            }
            if (!(g.sigma.row(r).array() > 0.0).all() || !g.sigma.row(r).allFinite()) {
                throw Error("sigma draw " + std::to_string(r) + " of group '" + g.name +
                            "' is not positive");
            }
        }
    }
}

}  // namespace simm
