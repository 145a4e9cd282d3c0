#include "simm/elicit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simm/error.hpp"
#include "simm/analysis.hpp"

namespace simm {

namespace {

constexpr double kSimplexTolerance = 1e-6;
// Squared-error objective above which the returned prior misses the targets noticeably.
constexpr double kUnmatchedObjective = 1e-4;

void check_targets(const Vector& means, const Vector& sds) {
    const Index k = means.size();
    if (k < 2) throw ValidationError(ValidationCode::TooFewSources, "elicitation needs at least 2 sources");
    if (sds.size() != k) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              "got " + std::to_string(k) + " target means but " +
                                  std::to_string(sds.size()) + " target sds");
    }
    if (!means.allFinite() || !sds.allFinite()) {
        throw ValidationError(ValidationCode::NonFinite, "elicitation targets must be finite");
    }
    if ((means.array() <= 0.0).any() || (means.array() >= 1.0).any() ||
        std::abs(means.sum() - 1.0) > kSimplexTolerance) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "target means must lie strictly inside (0, 1) and sum to 1");
    }
    for (Index i = 0; i < k; ++i) {
        const double limit = std::sqrt(means(i) * (1.0 - means(i)));
        if (!(sds(i) > 0.0) || !(sds(i) < limit)) {
            throw ValidationError(ValidationCode::InvalidArgument,
                                  "target sd " + std::to_string(sds(i)) + " for source " +
                                      std::to_string(i + 1) + " must lie in (0, " +
                                      std::to_string(limit) + ") given its mean");
        }
    }
}

class Objective {
public:
    Objective(const Vector& means, const Vector& sds, int n_sim, std::uint64_t seed)
        : means_(means), sds_(sds), z_(n_sim, means.size()) {
        Rng rng = make_rng(seed, {0x656c6963ULL});
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index r = 0; r < z_.rows(); ++r)
            for (Index c = 0; c < z_.cols(); ++c) z_(r, c) = normal(rng);
    }

    double operator()(const Vector& x) {
        ++evaluations;
        const Index k = means_.size();
        const Vector mu = x.head(k);
        const Vector scale = (0.5 * x.tail(k).array()).exp();
        if (!scale.allFinite() || !mu.allFinite()) return std::numeric_limits<double>::infinity();
        Vector sum = Vector::Zero(k);
        Vector sum_sq = Vector::Zero(k);
        Vector f(k);
        for (Index r = 0; r < z_.rows(); ++r) {
            f = mu.array() + scale.array() * z_.row(r).transpose().array();
            const double m = f.maxCoeff();
            f = (f.array() - m).exp();
            f /= f.sum();
            sum += f;
            sum_sq += f.cwiseAbs2();
        }
        const double n = static_cast<double>(z_.rows());
        const Vector mean = sum / n;
        const Vector var = ((sum_sq - n * mean.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
        const double value = (mean - means_).squaredNorm() + (var.cwiseSqrt() - sds_).squaredNorm();
        return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    }

    int evaluations = 0;

private:
    Vector means_;
    Vector sds_;
    Matrix z_;
};

struct NelderMeadResult {
    Vector x;
    double value;
    bool converged;
};

// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
NelderMeadResult nelder_mead(Objective& fn, const Vector& start, double step, int max_evals,
                             double tolerance) {
    const Index n = start.size();
    std::vector<Vector> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    for (Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)](i) += step;
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = fn(pts[i]);

    std::vector<std::size_t> order(pts.size());
    bool converged = false;
    while (fn.evaluations < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        double size = 0.0;
        for (const auto& p : pts) size = std::max(size, (p - pts[best]).cwiseAbs().maxCoeff());
        if (vals[worst] - vals[best] <= tolerance && size < 1e-6) {
            converged = true;
            break;
        }

        Vector centroid = Vector::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Vector reflected = centroid + (centroid - pts[worst]);
        const double fr = fn(reflected);
        if (fr < vals[best]) {
            const Vector expanded = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = fn(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                          : Vector(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = fn(contracted);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = fn(pts[i]);
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(it - vals.begin());
    return {pts[idx], *it, converged};
}

}  // namespace

Priors ElicitResult::to_priors(double a, double b) const {
    Priors p;
    p.mu0 = mu0;
    p.sigma0 = sigma0;
    p.a = a;
    p.b = b;
    p.validate(mu0.size());
    return p;
}

ProportionMoments prior_proportion_moments(const Priors& priors, int n, Rng& rng) {
    if (n < 2) throw ValidationError(ValidationCode::InvalidArgument, "need at least 2 draws");
    const Matrix draws = sample_prior_proportions(priors, n, rng);
    ProportionMoments m;
    m.mean = draws.colwise().mean().transpose();
    m.sd.resize(draws.cols());
    for (Index c = 0; c < draws.cols(); ++c) m.sd(c) = stats::sd(draws.col(c));
    return m;
}

ElicitResult elicit(const Vector& target_means, const Vector& target_sds, const ElicitControl& control) {
    check_targets(target_means, target_sds);
    if (control.n_sim < 100) {
        throw ValidationError(ValidationCode::InvalidArgument, "n_sim must be >= 100");
    }
    if (control.max_evaluations < 1) {
        throw ValidationError(ValidationCode::InvalidArgument, "max_evaluations must be positive");
    }
    const Index k = target_means.size();
    Objective objective(target_means, target_sds, control.n_sim, control.seed);

    ElicitResult result;
    Vector x = Vector::Zero(2 * k);
    result.default_objective = objective(x);

    // Restart from the best point until a restart no longer improves it.
    NelderMeadResult best{x, result.default_objective, false};
    double step = 1.0;
    for (int restart = 0; restart < 5 && objective.evaluations < control.max_evaluations; ++restart) {
        const double before = best.value;
        NelderMeadResult run = nelder_mead(objective, best.x, step, control.max_evaluations,
                                           control.tolerance);
        if (run.value <= best.value) best = run;
        else best.converged = run.converged;
        if (run.converged && before - best.value <= control.tolerance) break;
        step = 0.25;
    }

    result.mu0 = best.x.head(k).array() - best.x.head(k).mean();
    result.sigma0 = best.x.tail(k).array().exp().matrix().asDiagonal();
    result.objective = best.value;
    result.evaluations = objective.evaluations;
    result.converged = best.converged;
    if (result.objective > kUnmatchedObjective) {
        result.warnings.push_back("the targets could not be matched jointly (objective " +
                                  std::to_string(result.objective) +
                                  "); check that the sds are consistent with proportions summing to 1");
    }
    if (!result.converged) {
        result.warnings.push_back("elicitation optimizer did not converge within " +
                                  std::to_string(control.max_evaluations) +
                                  " evaluations; returning the best point found");
    }
    return result;
}

}  // namespace simm
