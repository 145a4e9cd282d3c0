#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "simm/rng.hpp"

namespace simm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raw, unvalidated mixing-model data. Optional tables default to
/// corrections = 0 and concentrations = 1 when the input is built.
struct SimmData {
    Matrix mixtures;  // n x J
    std::vector<std::string> tracer_names;
    std::vector<std::string> source_names;
    Matrix source_means;  // K x J
    Matrix source_sds;    // K x J
    std::optional<Matrix> correction_means;
    std::optional<Matrix> correction_sds;
    std::optional<Matrix> concentration_means;
    std::vector<std::string> groups;  // empty: every row belongs to group "1"
};

/// Validated, immutable dataset. Group order is order of first appearance.
class SimmInput {
public:
    explicit SimmInput(SimmData data);

    Index n_obs() const { return mixtures_.rows(); }
    Index n_sources() const { return source_means_.rows(); }
    Index n_tracers() const { return mixtures_.cols(); }
    std::size_t n_groups() const { return group_names_.size(); }

    const Matrix& mixtures() const { return mixtures_; }
    const std::vector<std::string>& tracer_names() const { return tracer_names_; }
    const std::vector<std::string>& source_names() const { return source_names_; }
    const Matrix& source_means() const { return source_means_; }
    const Matrix& source_sds() const { return source_sds_; }
    const Matrix& correction_means() const { return correction_means_; }
    const Matrix& correction_sds() const { return correction_sds_; }
    const Matrix& concentration_means() const { return concentration_means_; }
    const std::vector<std::string>& group_labels() const { return group_labels_; }

    const std::vector<std::string>& group_names() const { return group_names_; }
    const std::string& group_name(std::size_t g) const { return group_names_.at(g); }
    std::optional<std::size_t> find_group(const std::string& name) const;
    const std::vector<Index>& group_rows(std::size_t g) const { return group_rows_.at(g); }
    const Matrix& group_mixtures(std::size_t g) const { return group_mixtures_.at(g); }

    /// A group with a single observation is fitted in solo mode.
    bool is_solo(std::size_t g) const { return group_rows_.at(g).size() == 1; }

    /// True when every source sits at the same corrected position on every tracer.
    bool sources_coincide() const;

    std::optional<Index> source_index(const std::string& name) const;

private:
    Matrix mixtures_;
    std::vector<std::string> tracer_names_;
    std::vector<std::string> source_names_;
    Matrix source_means_;
    Matrix source_sds_;
    Matrix correction_means_;
    Matrix correction_sds_;
    Matrix concentration_means_;
    std::vector<std::string> group_labels_;
    std::vector<std::string> group_names_;
    std::vector<std::vector<Index>> group_rows_;
    std::vector<Matrix> group_mixtures_;
};

/// Prior on the CLR coordinates f ~ MVN(mu0, sigma0) and on each
/// residual precision tau_j = sigma_j^-2 ~ Gamma(shape a, rate b).
struct Priors {
    Vector mu0;
    Matrix sigma0;
    double a = 0.01;
    double b = 0.01;

    static Priors defaults(Index n_sources);

    /// Throws ValidationError unless dimensions match and sigma0 is SPD.
    void validate(Index n_sources) const;
};

/// Unconstrained CLR coordinates and residual precisions.
struct LatentParams {
    Vector f;
    Vector tau;
};

/// Softmax with max-subtraction. Throws on non-finite input.
Vector clr_inverse(const Eigen::Ref<const Vector>& f);

struct MixtureMoments {
    double mean = 0.0;
    /// Source and correction variance carried into the mixture, before sigma_j^2.
    double pre_residual_variance = 0.0;
};

MixtureMoments mixture_moments(const Eigen::Ref<const Vector>& p, const SimmInput& input,
                               Index tracer);

/// Sum of normal log-densities over the group's observations and tracers,
/// normalizing constants included.
double log_likelihood(const SimmInput& input, std::size_t group,
                      const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& sigma);

double deviance(const SimmInput& input, std::size_t group, const Eigen::Ref<const Vector>& p,
                const Eigen::Ref<const Vector>& sigma);

/// log p(y | f, tau) + log MVN(f; mu0, sigma0) + sum_j log Gamma(tau_j; a, b).
/// The density is over (f, tau); no Jacobian for any reparameterization.
double log_posterior(const SimmInput& input, std::size_t group, const Priors& priors,
                     const LatentParams& theta);

/// Gradient of log_posterior with respect to (f, log tau), stacked [K + J].
Vector log_posterior_gradient(const SimmInput& input, std::size_t group, const Priors& priors,
                              const LatentParams& theta);

/// Draws n mixture rows from the observation model at fixed (p, sigma),
/// using the source, correction and concentration tables of `input`.
Matrix simulate_mixtures(const SimmInput& input, const Eigen::Ref<const Vector>& p,
                         const Eigen::Ref<const Vector>& sigma, Index n, Rng& rng);

/// Precomputed per-group evaluator used by the samplers. Holds a reference
/// to the input, which must outlive it.
class GroupModel {
public:
    GroupModel(const SimmInput& input, std::size_t group, Priors priors);

    Index n_sources() const { return n_sources_; }
    Index n_tracers() const { return n_tracers_; }
    Index n_obs() const { return n_obs_; }
    const SimmInput& input() const { return *input_; }
    std::size_t group() const { return group_; }
    const Priors& priors() const { return priors_; }

    MixtureMoments moments(const Eigen::Ref<const Vector>& p, Index tracer) const;

    /// Log-likelihood given residual variances sigma_j^2.
    double log_likelihood_var(const Eigen::Ref<const Vector>& p,
                              const Eigen::Ref<const Vector>& residual_var) const;
    double log_likelihood(const Eigen::Ref<const Vector>& p,
                          const Eigen::Ref<const Vector>& sigma) const;

    double log_prior_f(const Eigen::Ref<const Vector>& f) const;
    double log_prior_tau(const Eigen::Ref<const Vector>& tau) const;

    double log_posterior(const Eigen::Ref<const Vector>& f,
                         const Eigen::Ref<const Vector>& tau) const;
    Vector log_posterior_gradient(const Eigen::Ref<const Vector>& f,
                                  const Eigen::Ref<const Vector>& tau) const;

private:
    const SimmInput* input_;
    std::size_t group_;
    Priors priors_;
    Index n_sources_;
    Index n_tracers_;
    Index n_obs_;
    Matrix corrected_means_;  // K x J, mu_s + mu_c
    Matrix total_source_var_;  // K x J, sigma_s^2 + sigma_c^2
    Matrix conc_;              // K x J
    Vector y_mean_;            // J
    Vector y_centered_ss_;     // J, sum (y - ybar)^2
    Eigen::LLT<Matrix> prior_chol_;
    double prior_log_norm_ = 0.0;
    double gamma_log_norm_ = 0.0;
};

}  // namespace simm
