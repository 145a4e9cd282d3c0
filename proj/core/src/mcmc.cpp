#include "simm/mcmc.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "simm/error.hpp"

namespace simm {

namespace {

constexpr int kMaxInitRetries = 100;

class MetropolisChain {
public:
    MetropolisChain(const GroupModel& model, const McmcControl& control, Rng rng)
        : model_(model), control_(control), rng_(std::move(rng)) {}

    /// Appends retained draws for this chain into `out` starting at row `offset`.
    void run(int chain_id, GroupDraws& out, Index offset, std::vector<double>& acceptance);

private:
    double target(const Vector& x) const {
        const Index k = model_.n_sources();
        const Index j = model_.n_tracers();
        const Vector tau = x.tail(j).array().exp();
        const double lp = model_.log_posterior(x.head(k), tau);
        // Jacobian of tau = exp(u).
        return lp + x.tail(j).sum();
    }

    Vector initial_state();

    const GroupModel& model_;
    const McmcControl& control_;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

Vector MetropolisChain::initial_state() {
    const Index k = model_.n_sources();
    const Index j = model_.n_tracers();
    const Matrix& y = model_.input().group_mixtures(model_.group());
    Vector x(k + j);
    for (Index t = 0; t < j; ++t) {
        double tau0 = model_.priors().a / model_.priors().b;
        if (y.rows() >= 2) {
            const double mean = y.col(t).mean();
            const double var = (y.col(t).array() - mean).square().sum() / static_cast<double>(y.rows() - 1);
            if (var > 0.0) tau0 = 1.0 / var;
        }
        x(k + t) = std::log(tau0);
    }
    int retries = 0;
    while (true) {
        for (Index i = 0; i < k; ++i) x(i) = normal_(rng_);
        if (std::isfinite(target(x))) return x;
        if (++retries >= kMaxInitRetries) {
            throw InitializationError("non-finite log-posterior at MCMC initialization", retries);
        }
    }
}

void MetropolisChain::run(int chain_id, GroupDraws& out, Index offset,
                          std::vector<double>& acceptance) {
    const Index k = model_.n_sources();
    const Index j = model_.n_tracers();
    const Index dim = k + j;

    Vector x = initial_state();
    double lp = target(x);
    Vector log_scale = Vector::Zero(dim);
    std::vector<int> window_accepts(static_cast<std::size_t>(dim), 0);
    std::vector<long> kept_accepts(static_cast<std::size_t>(dim), 0);
    int batch = 0;
    Index row = offset;

    for (int it = 0; it < control_.iterations; ++it) {
        for (Index i = 0; i < dim; ++i) {
            const double old = x(i);
            x(i) = old + std::exp(log_scale(i)) * normal_(rng_);
            const double proposed = target(x);
            if (std::log(uniform_(rng_)) < proposed - lp) {
                lp = proposed;
                ++window_accepts[static_cast<std::size_t>(i)];
                if (it >= control_.burn_in) ++kept_accepts[static_cast<std::size_t>(i)];
            } else {
                x(i) = old;
            }
        }

        if (it < control_.burn_in && (it + 1) % control_.adaptation_window == 0) {
            ++batch;
            const double step = 1.0 / std::sqrt(static_cast<double>(batch));
            for (Index i = 0; i < dim; ++i) {
                const double rate = window_accepts[static_cast<std::size_t>(i)] /
                                    static_cast<double>(control_.adaptation_window);
                log_scale(i) += step * (rate - control_.target_acceptance);
            }
        }
        if ((it + 1) % control_.adaptation_window == 0) {
            std::fill(window_accepts.begin(), window_accepts.end(), 0);
        }

        if (it >= control_.burn_in && (it - control_.burn_in + 1) % control_.thin == 0 &&
            row < offset + control_.draws_per_chain()) {
            const Vector p = clr_inverse(x.head(k));
            const Vector residual_var = (-x.tail(j).array()).exp();
            out.p.row(row) = p.transpose();
            out.sigma.row(row) = residual_var.array().sqrt().transpose();
            out.deviance(row) = -2.0 * model_.log_likelihood_var(p, residual_var);
            out.chain[static_cast<std::size_t>(row)] = chain_id;
            ++row;
        }
    }

    const double kept = static_cast<double>(control_.iterations - control_.burn_in);
    for (Index i = 0; i < dim; ++i) {
        acceptance[static_cast<std::size_t>(i)] += kept_accepts[static_cast<std::size_t>(i)] / kept;
    }
}

}  // namespace

Priors solo_priors(const Priors& priors) {
    Priors solo = priors;
    solo.a = 1000.0;
    solo.b = 0.1;
    return solo;
}

Priors group_priors(const SimmInput& input, std::size_t g, const Priors& priors) {
    return input.is_solo(g) ? solo_priors(priors) : priors;
}

GroupDraws run_mcmc_group(const GroupModel& model, const McmcControl& control,
                          std::vector<std::string>& warnings) {
    control.validate();
    const Index k = model.n_sources();
    const Index j = model.n_tracers();
    const Index per_chain = control.draws_per_chain();
    const Index total = per_chain * control.n_chains;

    GroupDraws out;
    out.name = model.input().group_name(model.group());
    out.solo = model.input().is_solo(model.group());
    out.p.resize(total, k);
    out.sigma.resize(total, j);
    out.deviance.resize(total);
    out.chain.assign(static_cast<std::size_t>(total), 0);
    out.acceptance.assign(static_cast<std::size_t>(k + j), 0.0);

    for (int c = 0; c < control.n_chains; ++c) {
        MetropolisChain chain(model, control,
                              make_rng(control.seed, {static_cast<std::uint64_t>(model.group()),
                                                      static_cast<std::uint64_t>(c)}));
        chain.run(c, out, c * per_chain, out.acceptance);
    }
    for (auto& a : out.acceptance) a /= control.n_chains;

    const auto& names = model.input().source_names();
    const auto& tracers = model.input().tracer_names();
    for (Index i = 0; i < k + j; ++i) {
        const double rate = out.acceptance[static_cast<std::size_t>(i)];
        if (rate < 0.1 || rate > 0.6) {
            const std::string block = i < k ? "f[" + names[static_cast<std::size_t>(i)] + "]"
                                            : "log tau[" + tracers[static_cast<std::size_t>(i - k)] + "]";
            warnings.push_back("group '" + out.name + "': acceptance rate " +
                               std::to_string(rate) + " for block " + block +
                               " is outside [0.1, 0.6]; consider a longer burn-in");
        }
    }
    return out;
}

PosteriorOutput run_mcmc(const SimmInput& input, const Priors& priors, const McmcControl& control) {
    control.validate();
    priors.validate(input.n_sources());

    PosteriorOutput out{.backend = Backend::Mcmc,
                        .input = input,
                        .priors = priors,
                        .mcmc_control = control,
                        .ffvb_control = std::nullopt,
                        .seed = control.seed,
                        .source_names = input.source_names(),
                        .source_map = identity_source_map(input.n_sources()),
                        .groups = {},
                        .warnings = {}};
    if (input.sources_coincide()) {
        out.warnings.push_back(
            "all sources share the same corrected position on every tracer; "
            "proportions are not identifiable");
    }
    for (std::size_t g = 0; g < input.n_groups(); ++g) {
        GroupModel model(input, g, group_priors(input, g, priors));
        out.groups.push_back(run_mcmc_group(model, control, out.warnings));
    }
    return out;
}

double potential_scale_reduction(const std::vector<std::vector<double>>& chains) {
    const std::size_t m = chains.size();
    if (m < 2) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "Gelman-Rubin diagnostics need at least 2 chains; "
                              "re-run with n_chains >= 2");
    }
    const std::size_t n = chains.front().size();
    if (n < 10) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "Gelman-Rubin diagnostics need at least 10 draws per chain");
    }
    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        if (chains[c].size() != n) {
            throw ValidationError(ValidationCode::DimensionMismatch, "chains differ in length");
        }
        double s = 0.0;
        for (double v : chains[c]) s += v;
        means[c] = s / static_cast<double>(n);
        double ss = 0.0;
        for (double v : chains[c]) ss += (v - means[c]) * (v - means[c]);
        vars[c] = ss / static_cast<double>(n - 1);
    }
    double grand = 0.0;
    for (double mu : means) grand += mu;
    grand /= static_cast<double>(m);
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between *= static_cast<double>(n) / static_cast<double>(m - 1);
    double within = 0.0;
    for (double v : vars) within += v;
    within /= static_cast<double>(m);
    if (within <= 0.0) {
        return between > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    return std::sqrt((within + between / static_cast<double>(n)) / within);
}

std::vector<std::pair<std::string, double>> gelman_rubin(const PosteriorOutput& output,
                                                         std::size_t group) {
    if (output.backend != Backend::Mcmc) {
        throw UnsupportedError("diagnostics are only available for MCMC output; "
                               "variational fits have no chains");
    }
    const GroupDraws& g = output.group(group);
    std::map<int, std::vector<Index>> rows_by_chain;
    for (Index r = 0; r < g.n_draws(); ++r) rows_by_chain[g.chain[static_cast<std::size_t>(r)]].push_back(r);

    auto split = [&](auto&& value) {
        std::vector<std::vector<double>> chains;
        for (const auto& [id, rows] : rows_by_chain) {
            std::vector<double> v;
            v.reserve(rows.size());
            for (Index r : rows) v.push_back(value(r));
            chains.push_back(std::move(v));
        }
        return chains;
    };

    std::vector<std::pair<std::string, double>> result;
    result.emplace_back("deviance", potential_scale_reduction(split([&](Index r) { return g.deviance(r); })));
    for (Index k = 0; k < g.p.cols(); ++k) {
        result.emplace_back(output.source_names[static_cast<std::size_t>(k)],
                            potential_scale_reduction(split([&](Index r) { return g.p(r, k); })));
    }
    for (Index j = 0; j < g.sigma.cols(); ++j) {
        result.emplace_back("sd[" + output.tracer_names()[static_cast<std::size_t>(j)] + "]",
                            potential_scale_reduction(split([&](Index r) { return g.sigma(r, j); })));
    }
    return result;
}

}  // namespace simm
