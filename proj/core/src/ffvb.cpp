#include "simm/ffvb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

#include "simm/error.hpp"
#include "simm/mcmc.hpp"

namespace simm {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kDiagFloor = 1e-8;

Index vech_size(Index k) { return k * (k + 1) / 2; }

}  // namespace

Index VariationalState::n_free() const {
    return n_sources() + vech_size(n_sources()) + 2 * n_tracers();
}

Vector VariationalState::free_coordinates() const {
    const Index k = n_sources();
    const Index j = n_tracers();
    Vector lambda(n_free());
    lambda.head(k) = mu_f;
    Index pos = k;
    for (Index col = 0; col < k; ++col) {
        for (Index row = col; row < k; ++row) lambda(pos++) = L_f(row, col);
    }
    lambda.segment(pos, j) = c.array().log();
    lambda.segment(pos + j, j) = d.array().log();
    return lambda;
}

void VariationalState::set_free_coordinates(const Eigen::Ref<const Vector>& lambda) {
    const Index k = n_sources();
    const Index j = n_tracers();
    mu_f = lambda.head(k);
    Index pos = k;
    L_f.setZero(k, k);
    for (Index col = 0; col < k; ++col) {
        for (Index row = col; row < k; ++row) L_f(row, col) = lambda(pos++);
        L_f(col, col) = std::max(L_f(col, col), kDiagFloor);
    }
    c = lambda.segment(pos, j).array().exp();
    d = lambda.segment(pos + j, j).array().exp();
}

VariationalState VariationalState::initial(const Vector& mu0, Index n_tracers) {
    VariationalState s;
    const Index k = mu0.size();
    s.mu_f = mu0;
    s.L_f = Matrix::Identity(k, k);
    s.c = Vector::Ones(n_tracers);
    s.d = Vector::Ones(n_tracers);
    s.g_bar = Vector::Zero(s.n_free());
    s.v_bar = Vector::Zero(s.n_free());
    return s;
}

ThetaSamples sample_q(const VariationalState& state, int S, Rng& rng) {
    const Index k = state.n_sources();
    const Index j = state.n_tracers();
    ThetaSamples out{Matrix(S, k), Matrix(S, j)};
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(k);
    for (int s = 0; s < S; ++s) {
        for (Index i = 0; i < k; ++i) z(i) = normal(rng);
        out.f.row(s) = (state.mu_f + state.L_f.triangularView<Eigen::Lower>() * z).transpose();
    }
    for (Index t = 0; t < j; ++t) {
        std::gamma_distribution<double> gamma(state.c(t), 1.0 / state.d(t));
        for (int s = 0; s < S; ++s) {
            out.tau(s, t) = std::max(gamma(rng), std::numeric_limits<double>::min());
        }
    }
    return out;
}

double log_q(const VariationalState& state, const Eigen::Ref<const Vector>& f,
             const Eigen::Ref<const Vector>& tau) {
    const Index k = state.n_sources();
    const Vector z = state.L_f.triangularView<Eigen::Lower>().solve(f - state.mu_f);
    double total = -0.5 * static_cast<double>(k) * kLogTwoPi -
                   state.L_f.diagonal().array().log().sum() - 0.5 * z.squaredNorm();
    for (Index t = 0; t < state.n_tracers(); ++t) {
        const double c = state.c(t);
        const double d = state.d(t);
        total += c * std::log(d) - std::lgamma(c) + (c - 1.0) * std::log(tau(t)) - d * tau(t);
    }
    return total;
}

Vector score(const VariationalState& state, const Eigen::Ref<const Vector>& f,
             const Eigen::Ref<const Vector>& tau) {
    const Index k = state.n_sources();
    const Index j = state.n_tracers();
    const auto L = state.L_f.triangularView<Eigen::Lower>();
    const Vector z = L.solve(f - state.mu_f);
    const Vector w = L.transpose().solve(z);

    Vector g(state.n_free());
    g.head(k) = w;
    Index pos = k;
    for (Index col = 0; col < k; ++col) {
        for (Index row = col; row < k; ++row) {
            double v = w(row) * z(col);
            if (row == col) v -= 1.0 / state.L_f(row, col);
            g(pos++) = v;
        }
    }
    for (Index t = 0; t < j; ++t) {
        const double c = state.c(t);
        const double d = state.d(t);
        // Chain rule through c = exp(log c), d = exp(log d).
        g(pos + t) = c * (std::log(d) - boost::math::digamma(c) + std::log(tau(t)));
        g(pos + j + t) = c - d * tau(t);
    }
    return g;
}

LogJoint make_log_joint(const GroupModel& model) {
    return [&model](const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& tau) {
        return model.log_posterior(f, tau);
    };
}

double h_lambda(const VariationalState& state, const Eigen::Ref<const Vector>& f,
                const Eigen::Ref<const Vector>& tau, const LogJoint& log_joint) {
    return log_joint(f, tau) - log_q(state, f, tau);
}

double h_lambda(const VariationalState& state, const LatentParams& theta, const SimmInput& input,
                std::size_t group, const Priors& priors) {
    GroupModel model(input, group, priors);
    return h_lambda(state, theta.f, theta.tau, make_log_joint(model));
}

ScoreBatch evaluate_batch(const VariationalState& state, const ThetaSamples& samples,
                          const LogJoint& log_joint) {
    const Index S = samples.size();
    ScoreBatch batch{Matrix(S, state.n_free()), Vector(S)};
    for (Index s = 0; s < S; ++s) {
        const Vector f = samples.f.row(s).transpose();
        const Vector tau = samples.tau.row(s).transpose();
        batch.scores.row(s) = score(state, f, tau).transpose();
        batch.h(s) = h_lambda(state, f, tau, log_joint);
    }
    return batch;
}

namespace {

std::vector<Index> finite_rows(const ScoreBatch& batch) {
    std::vector<Index> rows;
    for (Index s = 0; s < batch.h.size(); ++s) {
        if (std::isfinite(batch.h(s)) && batch.scores.row(s).allFinite()) rows.push_back(s);
    }
    return rows;
}

}  // namespace

Vector lb_gradient(const ScoreBatch& batch, const Eigen::Ref<const Vector>& controls) {
    const Index D = batch.scores.cols();
    Vector g = Vector::Zero(D);
    const auto rows = finite_rows(batch);
    if (rows.empty()) return g;
    for (Index s : rows) {
        g.array() += batch.scores.row(s).transpose().array() * (batch.h(s) - controls.array());
    }
    return g / static_cast<double>(rows.size());
}

Vector lb_gradient(const VariationalState& state, const ThetaSamples& samples,
                   const LogJoint& log_joint, const Eigen::Ref<const Vector>& controls) {
    return lb_gradient(evaluate_batch(state, samples, log_joint), controls);
}

Vector control_variates(const ScoreBatch& batch) {
    const Index D = batch.scores.cols();
    Vector cv = Vector::Zero(D);
    const auto rows = finite_rows(batch);
    if (rows.size() < 2) return cv;
    const double n = static_cast<double>(rows.size());
    for (Index i = 0; i < D; ++i) {
        double mean_x = 0.0, mean_y = 0.0;
        for (Index s : rows) {
            const double x = batch.scores(s, i);
            mean_x += x;
            mean_y += x * batch.h(s);
        }
        mean_x /= n;
        mean_y /= n;
        double cov = 0.0, var = 0.0;
        for (Index s : rows) {
            const double dx = batch.scores(s, i) - mean_x;
            cov += (batch.scores(s, i) * batch.h(s) - mean_y) * dx;
            var += dx * dx;
        }
        cov /= n - 1.0;
        var /= n - 1.0;
        cv(i) = var < 1e-12 ? 0.0 : cov / var;
    }
    return cv;
}

Vector control_variates(const ThetaSamples& samples, const VariationalState& state,
                        const LogJoint& log_joint) {
    return control_variates(evaluate_batch(state, samples, log_joint));
}

double lower_bound_estimate(const ScoreBatch& batch) { return batch.h.mean(); }

double learning_rate(int t, const FfvbControl& control) {
    return std::min(control.eps0, control.eps0 * control.alpha / static_cast<double>(t));
}

VariationalState adaptive_update(VariationalState state, const Eigen::Ref<const Vector>& gradient,
                                 const FfvbControl& control) {
    const Vector v = gradient.array().square();
    state.g_bar = control.beta1 * state.g_bar + (1.0 - control.beta1) * gradient;
    state.v_bar = control.beta2 * state.v_bar + (1.0 - control.beta2) * v;
    const double lr = learning_rate(std::max(state.t, 1), control);

    Vector step(gradient.size());
    for (Index i = 0; i < step.size(); ++i) {
        const double root = std::sqrt(state.v_bar(i));
        step(i) = root > 0.0 ? lr * state.g_bar(i) / root : 0.0;
    }
    state.set_free_coordinates(state.free_coordinates() + step);
    return state;
}

FfvbResult optimize_ffvb(const LogJoint& log_joint, VariationalState state,
                         const FfvbControl& control, Rng& rng) {
    control.validate();
    FfvbResult result;

    // Initialization: the plain gradient seeds both moment estimates and the
    // first control variates come from the same samples.
    Vector cv;
    {
        const ThetaSamples samples = sample_q(state, control.S, rng);
        const ScoreBatch batch = evaluate_batch(state, samples, log_joint);
        const Vector g0 = lb_gradient(batch, Vector::Zero(state.n_free()));
        state.g_bar = g0;
        state.v_bar = g0.array().square();
        cv = control_variates(batch);
    }
    state.patience = 0;
    state.lb_history.clear();
    state.lb_history.reserve(static_cast<std::size_t>(control.max_iterations));

    double best_average = -std::numeric_limits<double>::infinity();
    int non_finite_run = 0;

    for (int t = 1; t <= control.max_iterations; ++t) {
        state.t = t;
        const ThetaSamples draws = sample_q(state, control.S, rng);
        const ScoreBatch current = evaluate_batch(state, draws, log_joint);
        const Vector g = lb_gradient(current, cv);
        cv = control_variates(current);
        const double lb = lower_bound_estimate(current);

        state = adaptive_update(std::move(state), g, control);
        if (!state.free_coordinates().allFinite()) {
            throw DivergenceError("variational parameters became non-finite at iteration " +
                                  std::to_string(t) + "; try a smaller eps0");
        }

        non_finite_run = std::isfinite(lb) ? 0 : non_finite_run + 1;
        if (non_finite_run >= control.t_W) {
            throw DivergenceError("lower bound estimate was -inf for " +
                                  std::to_string(control.t_W) +
                                  " consecutive iterations; try a smaller eps0");
        }

        state.lb_history.push_back(lb);
        TraceRow row{t, lb, std::nullopt, state.patience};
        if (t >= control.t_W) {
            const double average =
                std::accumulate(state.lb_history.end() - control.t_W, state.lb_history.end(), 0.0) /
                control.t_W;
            if (average >= best_average) {
                state.patience = 0;
            } else {
                ++state.patience;
            }
            best_average = std::max(best_average, average);
            row.moving_average = average;
            row.patience = state.patience;
        }
        result.trace.push_back(row);
        if (state.patience >= control.P) {
            result.stopped_by_patience = true;
            break;
        }
    }
    result.state = std::move(state);
    return result;
}

PosteriorOutput run_ffvb(const SimmInput& input, const Priors& priors, const FfvbControl& control) {
    control.validate();
    priors.validate(input.n_sources());

    PosteriorOutput out{.backend = Backend::Ffvb,
                        .input = input,
                        .priors = priors,
                        .mcmc_control = std::nullopt,
                        .ffvb_control = control,
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

    const Index k = input.n_sources();
    const Index j = input.n_tracers();
    for (std::size_t g = 0; g < input.n_groups(); ++g) {
        GroupModel model(input, g, group_priors(input, g, priors));
        Rng rng = make_rng(control.seed, {static_cast<std::uint64_t>(g), 0});
        FfvbResult fit = optimize_ffvb(make_log_joint(model),
                                       VariationalState::initial(priors.mu0, j), control, rng);
        if (!fit.stopped_by_patience) {
            out.warnings.push_back("group '" + input.group_name(g) +
                                   "': FFVB reached max_iterations before the patience rule stopped it");
        }

        Rng draw_rng = make_rng(control.seed, {static_cast<std::uint64_t>(g), 1});
        const ThetaSamples draws = sample_q(fit.state, control.n_output_draws, draw_rng);
        GroupDraws gd;
        gd.name = input.group_name(g);
        gd.solo = input.is_solo(g);
        gd.p.resize(draws.size(), k);
        gd.sigma.resize(draws.size(), j);
        gd.deviance.resize(draws.size());
        gd.chain.assign(static_cast<std::size_t>(draws.size()), 0);
        for (Index r = 0; r < draws.size(); ++r) {
            const Vector p = clr_inverse(draws.f.row(r).transpose());
            const Vector residual_var = draws.tau.row(r).transpose().cwiseInverse();
            gd.p.row(r) = p.transpose();
            gd.sigma.row(r) = residual_var.array().sqrt().transpose();
            gd.deviance(r) = -2.0 * model.log_likelihood_var(p, residual_var);
        }
        gd.trace = std::move(fit.trace);
        gd.iterations = static_cast<int>(gd.trace.size());
        out.groups.push_back(std::move(gd));
    }
    return out;
}

}  // namespace simm
