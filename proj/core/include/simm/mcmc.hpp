#pragma once

#include <string>
#include <utility>
#include <vector>

#include "simm/output.hpp"

namespace simm {

/// Fits every group independently with adaptive random-walk Metropolis on
/// (f, log tau). Groups with one observation use solo_priors().
PosteriorOutput run_mcmc(const SimmInput& input, const Priors& priors, const McmcControl& control);

/// Runs all chains for a single group. Warnings are appended to `warnings`.
GroupDraws run_mcmc_group(const GroupModel& model, const McmcControl& control,
                          std::vector<std::string>& warnings);

/// Residual-precision prior for single-observation groups: Gamma(1000, 0.1),
/// i.e. E[tau] = 1e4 and a prior sigma scale of about 0.01.
Priors solo_priors(const Priors& priors);

/// Priors actually used for group g (solo priors when the group has n = 1).
Priors group_priors(const SimmInput& input, std::size_t g, const Priors& priors);

/// Potential scale reduction for one scalar quantity given per-chain draws.
/// Uses V = W + B/n so identical chains give exactly 1.
double potential_scale_reduction(const std::vector<std::vector<double>>& chains);

/// R-hat for deviance, each proportion and each sd[tracer], in that order.
std::vector<std::pair<std::string, double>> gelman_rubin(const PosteriorOutput& output,
                                                         std::size_t group);

}  // namespace simm
