#include "simm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "simm/error.hpp"

namespace simm {

std::string_view to_string(ValidationCode code) {
    switch (code) {
        case ValidationCode::InvalidArgument: return "invalid-argument";
        case ValidationCode::DimensionMismatch: return "dimension-mismatch";
        case ValidationCode::NegativeSd: return "negative-sd";
        case ValidationCode::InvalidConcentration: return "invalid-concentration";
        case ValidationCode::NonFinite: return "non-finite";
        case ValidationCode::UnknownTracer: return "unknown-tracer";
        case ValidationCode::MissingColumn: return "missing-column";
        case ValidationCode::DuplicateName: return "duplicate-name";
        case ValidationCode::EmptyGroup: return "empty-group";
        case ValidationCode::TooFewSources: return "too-few-sources";
        case ValidationCode::UnknownSource: return "unknown-source";
        case ValidationCode::UnknownGroup: return "unknown-group";
        case ValidationCode::FileNotFound: return "file-not-found";
        case ValidationCode::Parse: return "parse-error";
    }
    return "validation-error";
}

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void require_shape(const Matrix& m, Index rows, Index cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()) + ", expected " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
}

void require_finite(const Matrix& m, const char* what) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j))) {
                throw ValidationError(ValidationCode::NonFinite,
                                      std::string(what) + " has a non-finite value at row " +
                                          std::to_string(i + 1) + ", column " +
                                          std::to_string(j + 1));
            }
        }
    }
}

void require_non_negative(const Matrix& m, const char* what) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) < 0.0) {
                throw ValidationError(ValidationCode::NegativeSd,
                                      std::string(what) + " is negative at row " +
                                          std::to_string(i + 1) + ", column " +
                                          std::to_string(j + 1));
            }
        }
    }
}

void require_unique(const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw ValidationError(ValidationCode::DuplicateName,
                                  std::string("duplicate ") + what + " name '" + n + "'");
        }
    }
}

}  // namespace

SimmInput::SimmInput(SimmData data) {
    const Index n = data.mixtures.rows();
    const Index j = data.mixtures.cols();
    const Index k = data.source_means.rows();

    if (n < 1) {
        throw ValidationError(ValidationCode::DimensionMismatch, "no mixture observations");
    }
    if (j < 1) {
        throw ValidationError(ValidationCode::DimensionMismatch, "no tracer columns");
    }
    if (k < 2) {
        throw ValidationError(ValidationCode::TooFewSources,
                              "at least 2 sources are required, got " + std::to_string(k));
    }

    if (data.tracer_names.empty()) {
        for (Index t = 0; t < j; ++t) data.tracer_names.push_back("tracer" + std::to_string(t + 1));
    }
    if (static_cast<Index>(data.tracer_names.size()) != j) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              std::to_string(data.tracer_names.size()) +
                                  " tracer names for " + std::to_string(j) + " tracer columns");
    }
    if (static_cast<Index>(data.source_names.size()) != k) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              std::to_string(data.source_names.size()) + " source names for " +
                                  std::to_string(k) + " source rows");
    }
    require_unique(data.tracer_names, "tracer");
    require_unique(data.source_names, "source");

    require_shape(data.source_means, k, j, "source_means");
    require_shape(data.source_sds, k, j, "source_sds");
    Matrix corr_means = data.correction_means.value_or(Matrix::Zero(k, j));
    Matrix corr_sds = data.correction_sds.value_or(Matrix::Zero(k, j));
    Matrix conc = data.concentration_means.value_or(Matrix::Ones(k, j));
    require_shape(corr_means, k, j, "correction_means");
    require_shape(corr_sds, k, j, "correction_sds");
    require_shape(conc, k, j, "concentration_means");

    require_finite(data.mixtures, "mixtures");
    require_finite(data.source_means, "source_means");
    require_finite(data.source_sds, "source_sds");
    require_finite(corr_means, "correction_means");
    require_finite(corr_sds, "correction_sds");
    require_finite(conc, "concentration_means");
    require_non_negative(data.source_sds, "source_sds");
    require_non_negative(corr_sds, "correction_sds");
    for (Index s = 0; s < k; ++s) {
        for (Index t = 0; t < j; ++t) {
            if (!(conc(s, t) > 0.0 && conc(s, t) <= 1.0)) {
                throw ValidationError(ValidationCode::InvalidConcentration,
                                      "concentration for source '" + data.source_names[s] +
                                          "' on tracer '" + data.tracer_names[t] +
                                          "' must lie in (0, 1]");
            }
        }
    }

    if (data.groups.empty()) data.groups.assign(static_cast<std::size_t>(n), "1");
    if (static_cast<Index>(data.groups.size()) != n) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              std::to_string(data.groups.size()) + " group labels for " +
                                  std::to_string(n) + " mixture rows");
    }
    for (std::size_t i = 0; i < data.groups.size(); ++i) {
        if (data.groups[i].empty()) {
            throw ValidationError(ValidationCode::EmptyGroup,
                                  "mixture row " + std::to_string(i + 1) + " has an empty group label");
        }
        auto it = std::find(group_names_.begin(), group_names_.end(), data.groups[i]);
        if (it == group_names_.end()) {
            group_names_.push_back(data.groups[i]);
            group_rows_.emplace_back();
            it = group_names_.end() - 1;
        }
        group_rows_[static_cast<std::size_t>(it - group_names_.begin())].push_back(
            static_cast<Index>(i));
    }
    for (const auto& rows : group_rows_) {
        Matrix m(static_cast<Index>(rows.size()), j);
        for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Index>(r)) = data.mixtures.row(rows[r]);
        group_mixtures_.push_back(std::move(m));
    }

    mixtures_ = std::move(data.mixtures);
    tracer_names_ = std::move(data.tracer_names);
    source_names_ = std::move(data.source_names);
    source_means_ = std::move(data.source_means);
    source_sds_ = std::move(data.source_sds);
    correction_means_ = std::move(corr_means);
    correction_sds_ = std::move(corr_sds);
    concentration_means_ = std::move(conc);
    group_labels_ = std::move(data.groups);
}

std::optional<std::size_t> SimmInput::find_group(const std::string& name) const {
    auto it = std::find(group_names_.begin(), group_names_.end(), name);
    if (it == group_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - group_names_.begin());
}

std::optional<Index> SimmInput::source_index(const std::string& name) const {
    auto it = std::find(source_names_.begin(), source_names_.end(), name);
    if (it == source_names_.end()) return std::nullopt;
    return static_cast<Index>(it - source_names_.begin());
}

bool SimmInput::sources_coincide() const {
    const Matrix pos = source_means_ + correction_means_;
    for (Index s = 1; s < pos.rows(); ++s) {
        if (pos.row(s) != pos.row(0)) return false;
    }
    return true;
}

Priors Priors::defaults(Index n_sources) {
    Priors p;
    p.mu0 = Vector::Zero(n_sources);
    p.sigma0 = Matrix::Identity(n_sources, n_sources);
    return p;
}

void Priors::validate(Index n_sources) const {
    if (mu0.size() != n_sources || sigma0.rows() != n_sources || sigma0.cols() != n_sources) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              "prior dimensions do not match " + std::to_string(n_sources) +
                                  " sources");
    }
    if (!mu0.allFinite() || !sigma0.allFinite()) {
        throw ValidationError(ValidationCode::NonFinite, "prior contains non-finite values");
    }
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "precision prior shape and rate must be positive");
    }
    if (!sigma0.isApprox(sigma0.transpose(), 1e-12)) {
        throw ValidationError(ValidationCode::InvalidArgument, "sigma0 must be symmetric");
    }
    Eigen::LLT<Matrix> llt(sigma0);
    if (llt.info() != Eigen::Success) {
        throw ValidationError(ValidationCode::InvalidArgument,
                              "sigma0 must be positive definite");
    }
}

Vector clr_inverse(const Eigen::Ref<const Vector>& f) {
    if (!f.allFinite()) {
        throw ValidationError(ValidationCode::NonFinite, "clr_inverse requires finite input");
    }
    Vector p = (f.array() - f.maxCoeff()).exp();
    p /= p.sum();
    return p;
}

MixtureMoments mixture_moments(const Eigen::Ref<const Vector>& p, const SimmInput& input,
                               Index tracer) {
    if (p.size() != input.n_sources()) {
        throw ValidationError(ValidationCode::DimensionMismatch,
                              "proportion vector length does not match source count");
    }
    if (tracer < 0 || tracer >= input.n_tracers()) {
        throw ValidationError(ValidationCode::InvalidArgument, "tracer index out of range");
    }
    const auto q = input.concentration_means().col(tracer).array();
    const auto w = p.array() * q;
    const double denom = w.sum();
    const auto pos = input.source_means().col(tracer).array() +
                     input.correction_means().col(tracer).array();
    const auto var = input.source_sds().col(tracer).array().square() +
                     input.correction_sds().col(tracer).array().square();
    MixtureMoments m;
    m.mean = (w * pos).sum() / denom;
    m.pre_residual_variance = (w.square() * var).sum() / (denom * denom);
    return m;
}

double log_likelihood(const SimmInput& input, std::size_t group, const Eigen::Ref<const Vector>& p,
                      const Eigen::Ref<const Vector>& sigma) {
    GroupModel model(input, group, Priors::defaults(input.n_sources()));
    return model.log_likelihood(p, sigma);
}

double deviance(const SimmInput& input, std::size_t group, const Eigen::Ref<const Vector>& p,
                const Eigen::Ref<const Vector>& sigma) {
    return -2.0 * log_likelihood(input, group, p, sigma);
}

double log_posterior(const SimmInput& input, std::size_t group, const Priors& priors,
                     const LatentParams& theta) {
    GroupModel model(input, group, priors);
    return model.log_posterior(theta.f, theta.tau);
}

Vector log_posterior_gradient(const SimmInput& input, std::size_t group, const Priors& priors,
                              const LatentParams& theta) {
    GroupModel model(input, group, priors);
    return model.log_posterior_gradient(theta.f, theta.tau);
}

Matrix simulate_mixtures(const SimmInput& input, const Eigen::Ref<const Vector>& p,
                         const Eigen::Ref<const Vector>& sigma, Index n, Rng& rng) {
    if (sigma.size() != input.n_tracers()) {
        throw ValidationError(ValidationCode::DimensionMismatch, "sigma length does not match tracer count");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix y(n, input.n_tracers());
    for (Index j = 0; j < input.n_tracers(); ++j) {
        const MixtureMoments m = mixture_moments(p, input, j);
        const double sd = std::sqrt(m.pre_residual_variance + sigma(j) * sigma(j));
        for (Index i = 0; i < n; ++i) y(i, j) = m.mean + sd * normal(rng);
    }
    return y;
}

GroupModel::GroupModel(const SimmInput& input, std::size_t group, Priors priors)
    : input_(&input),
      group_(group),
      priors_(std::move(priors)),
      n_sources_(input.n_sources()),
      n_tracers_(input.n_tracers()) {
    if (group >= input.n_groups()) {
        throw ValidationError(ValidationCode::UnknownGroup,
                              "group index " + std::to_string(group) + " out of range");
    }
    priors_.validate(n_sources_);
    const Matrix& y = input.group_mixtures(group);
    n_obs_ = y.rows();
    corrected_means_ = input.source_means() + input.correction_means();
    total_source_var_ =
        input.source_sds().array().square() + input.correction_sds().array().square();
    conc_ = input.concentration_means();
    y_mean_ = y.colwise().mean().transpose();
    y_centered_ss_ = (y.rowwise() - y_mean_.transpose()).array().square().colwise().sum().transpose();

    prior_chol_.compute(priors_.sigma0);
    const double log_det = 2.0 * prior_chol_.matrixL().toDenseMatrix().diagonal().array().log().sum();
    prior_log_norm_ = -0.5 * static_cast<double>(n_sources_) * kLogTwoPi - 0.5 * log_det;
    gamma_log_norm_ = priors_.a * std::log(priors_.b) - std::lgamma(priors_.a);
}

MixtureMoments GroupModel::moments(const Eigen::Ref<const Vector>& p, Index tracer) const {
    const auto w = p.array() * conc_.col(tracer).array();
    const double denom = w.sum();
    MixtureMoments m;
    m.mean = (w * corrected_means_.col(tracer).array()).sum() / denom;
    m.pre_residual_variance = (w.square() * total_source_var_.col(tracer).array()).sum() / (denom * denom);
    return m;
}

double GroupModel::log_likelihood_var(const Eigen::Ref<const Vector>& p,
                                      const Eigen::Ref<const Vector>& residual_var) const {
    const double n = static_cast<double>(n_obs_);
    double total = 0.0;
    for (Index j = 0; j < n_tracers_; ++j) {
        const MixtureMoments m = moments(p, j);
        const double var = m.pre_residual_variance + residual_var(j);
        const double diff = y_mean_(j) - m.mean;
        const double sq = y_centered_ss_(j) + n * diff * diff;
        if (var <= 0.0) {
            // Degenerate point mass: impossible unless every y sits on the mean.
            if (sq > 0.0) return -std::numeric_limits<double>::infinity();
            return std::numeric_limits<double>::infinity();
        }
        total += -0.5 * n * (kLogTwoPi + std::log(var)) - 0.5 * sq / var;
    }
    return total;
}

double GroupModel::log_likelihood(const Eigen::Ref<const Vector>& p,
                                  const Eigen::Ref<const Vector>& sigma) const {
    return log_likelihood_var(p, sigma.array().square().matrix());
}

double GroupModel::log_prior_f(const Eigen::Ref<const Vector>& f) const {
    const Vector z = prior_chol_.matrixL().solve(f - priors_.mu0);
    return prior_log_norm_ - 0.5 * z.squaredNorm();
}

double GroupModel::log_prior_tau(const Eigen::Ref<const Vector>& tau) const {
    double total = 0.0;
    for (Index j = 0; j < tau.size(); ++j) {
        total += gamma_log_norm_ + (priors_.a - 1.0) * std::log(tau(j)) - priors_.b * tau(j);
    }
    return total;
}

double GroupModel::log_posterior(const Eigen::Ref<const Vector>& f,
                                 const Eigen::Ref<const Vector>& tau) const {
    const Vector p = clr_inverse(f);
    return log_likelihood_var(p, tau.cwiseInverse()) + log_prior_f(f) + log_prior_tau(tau);
}

Vector GroupModel::log_posterior_gradient(const Eigen::Ref<const Vector>& f,
                                          const Eigen::Ref<const Vector>& tau) const {
    const Index k = n_sources_;
    const double n = static_cast<double>(n_obs_);
    const Vector p = clr_inverse(f);
    Vector grad = Vector::Zero(k + n_tracers_);
    Vector dl_dp = Vector::Zero(k);

    for (Index j = 0; j < n_tracers_; ++j) {
        const auto q = conc_.col(j).array();
        const auto mu = corrected_means_.col(j).array();
        const auto s2 = total_source_var_.col(j).array();
        const double w_sum = (p.array() * q).sum();
        const MixtureMoments m = moments(p, j);
        const double var = m.pre_residual_variance + 1.0 / tau(j);
        const double diff = y_mean_(j) - m.mean;
        const double sq = y_centered_ss_(j) + n * diff * diff;

        const double dl_dmean = n * diff / var;
        const double dl_dvar = -0.5 * n / var + 0.5 * sq / (var * var);

        // d mean / d p_k and d pre_var / d p_k for the ratio forms.
        const Eigen::ArrayXd dmean = q * (mu - m.mean) / w_sum;
        const Eigen::ArrayXd dvar =
            2.0 * p.array() * q.square() * s2 / (w_sum * w_sum) - 2.0 * m.pre_residual_variance * q / w_sum;
        dl_dp.array() += dl_dmean * dmean + dl_dvar * dvar;

        // var depends on tau_j through 1/tau_j = exp(-log tau_j).
        grad(k + j) += dl_dvar * (-1.0 / tau(j));
        grad(k + j) += (priors_.a - 1.0) - priors_.b * tau(j);
    }

    // Softmax Jacobian: d p_k / d f_l = p_k (delta_kl - p_l).
    const double weighted = p.dot(dl_dp);
    grad.head(k) = (p.array() * (dl_dp.array() - weighted)).matrix();
    grad.head(k) -= prior_chol_.solve(f - priors_.mu0);
    return grad;
}

}  // namespace simm
