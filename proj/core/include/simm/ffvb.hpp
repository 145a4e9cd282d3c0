#pragma once

#include <functional>
#include <vector>

#include "simm/output.hpp"

namespace simm {

/// Hyperparameters of q(f) q(tau) = MVN(mu_f, L_f L_f^T) x prod_j Gamma(c_j, rate d_j)
/// plus the optimizer's running state.
///
/// The optimizer works on the free coordinates
///   [ mu_f (K) | vech(L_f) (K(K+1)/2, column-major lower triangle) | log c (J) | log d (J) ]
/// so additive updates keep c and d positive. The diagonal of L_f is
/// floored at 1e-8 after each update.
struct VariationalState {
    Vector mu_f;
    Matrix L_f;
    Vector c;
    Vector d;
    Vector g_bar;
    Vector v_bar;
    int t = 0;
    int patience = 0;
    std::vector<double> lb_history;

    Index n_sources() const { return mu_f.size(); }
    Index n_tracers() const { return c.size(); }
    Index n_free() const;

    Vector free_coordinates() const;
    void set_free_coordinates(const Eigen::Ref<const Vector>& lambda);

    /// mu_f = mu0, L_f = I, c = d = 1, zero moments.
    static VariationalState initial(const Vector& mu0, Index n_tracers);
};

/// S draws of theta = (f, tau), one per row.
struct ThetaSamples {
    Matrix f;    // S x K
    Matrix tau;  // S x J
    Index size() const { return f.rows(); }
};

ThetaSamples sample_q(const VariationalState& state, int S, Rng& rng);

double log_q(const VariationalState& state, const Eigen::Ref<const Vector>& f,
             const Eigen::Ref<const Vector>& tau);

/// Gradient of log q with respect to the free coordinates.
Vector score(const VariationalState& state, const Eigen::Ref<const Vector>& f,
             const Eigen::Ref<const Vector>& tau);

/// Log joint density h(theta) = log p(y | theta) p(theta).
using LogJoint =
    std::function<double(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& tau)>;

LogJoint make_log_joint(const GroupModel& model);

/// h(theta) - log q(theta).
double h_lambda(const VariationalState& state, const Eigen::Ref<const Vector>& f,
                const Eigen::Ref<const Vector>& tau, const LogJoint& log_joint);
double h_lambda(const VariationalState& state, const LatentParams& theta, const SimmInput& input,
                std::size_t group, const Priors& priors);

/// Per-sample scores (S x D) and h_lambda values (S) at the current state.
struct ScoreBatch {
    Matrix scores;
    Vector h;
};

ScoreBatch evaluate_batch(const VariationalState& state, const ThetaSamples& samples,
                          const LogJoint& log_joint);

/// (1/S) sum_s score_s o (h_s - c). Samples with non-finite h are skipped.
Vector lb_gradient(const ScoreBatch& batch, const Eigen::Ref<const Vector>& controls);
Vector lb_gradient(const VariationalState& state, const ThetaSamples& samples,
                   const LogJoint& log_joint, const Eigen::Ref<const Vector>& controls);

/// Per coordinate Cov(score * h, score) / Var(score); 0 where Var < 1e-12.
Vector control_variates(const ScoreBatch& batch);
Vector control_variates(const ThetaSamples& samples, const VariationalState& state,
                        const LogJoint& log_joint);

/// Sample mean of h_lambda over the batch.
double lower_bound_estimate(const ScoreBatch& batch);

/// l_t = min(eps0, eps0 * alpha / t).
double learning_rate(int t, const FfvbControl& control);

/// Moment updates and the step lambda += l_t * g_bar / sqrt(v_bar), using state.t
/// as the iteration index. 0 / sqrt(0) is taken as 0.
VariationalState adaptive_update(VariationalState state, const Eigen::Ref<const Vector>& gradient,
                                 const FfvbControl& control);

struct FfvbResult {
    VariationalState state;
    std::vector<TraceRow> trace;
    bool stopped_by_patience = false;
};

/// Runs the full optimizer from `init` until patience >= P or max_iterations.
FfvbResult optimize_ffvb(const LogJoint& log_joint, VariationalState init,
                         const FfvbControl& control, Rng& rng);

/// Fits each group, then draws n_output_draws fresh samples from the final q.
PosteriorOutput run_ffvb(const SimmInput& input, const Priors& priors, const FfvbControl& control);

}  // namespace simm
