#pragma once

#include <cstdint>

#include "simm/rng.hpp"

namespace simm {

/// Adaptive random-walk Metropolis settings. Retained draws per chain are
/// (iterations - burn_in) / thin, rounded down.
struct McmcControl {
    int n_chains = 4;
    int iterations = 10000;
    int burn_in = 1000;
    int thin = 10;
    std::uint64_t seed = kDefaultSeed;
    double target_acceptance = 0.44;
    int adaptation_window = 50;

    void validate() const;
    int draws_per_chain() const { return (iterations - burn_in) / thin; }
};

/// Fixed-form variational Bayes settings.
struct FfvbControl {
    int S = 100;
    double beta1 = 0.9;
    double beta2 = 0.9;
    double eps0 = 0.02;
    double alpha = 1000.0;
    int t_W = 50;
    int P = 20;
    int max_iterations = 5000;
    int n_output_draws = 3600;
    std::uint64_t seed = kDefaultSeed;

    void validate() const;
};

}  // namespace simm
