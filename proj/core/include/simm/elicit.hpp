#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simm/model.hpp"

namespace simm {

struct ElicitControl {
    int n_sim = 10000;
    std::uint64_t seed = kDefaultSeed;
    int max_evaluations = 20000;
    /// Stop when the simplex objective spread falls below this.
    double tolerance = 1e-12;
};

struct ElicitResult {
    Vector mu0;      // sums to zero
    Matrix sigma0;   // diagonal
    double objective = 0.0;
    double default_objective = 0.0;  // at mu0 = 0, sigma0 = I
    int evaluations = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    /// Priors with the elicited (mu0, sigma0) and the given precision prior.
    Priors to_priors(double a = 0.01, double b = 0.01) const;
};

/// Proportion moments of clr_inverse(f), f ~ MVN(mu0, sigma0), from n draws.
struct ProportionMoments {
    Vector mean;
    Vector sd;
};

ProportionMoments prior_proportion_moments(const Priors& priors, int n, Rng& rng);

/// Matches Monte Carlo means and sds of the induced proportions to the
/// targets by Nelder-Mead over (mu0, log diag sigma0), with common random
/// numbers across objective evaluations.
ElicitResult elicit(const Vector& target_means, const Vector& target_sds,
                    const ElicitControl& control = {});

}  // namespace simm
