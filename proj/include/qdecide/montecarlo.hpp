// Stochastic simulation of the sequential and grouped measurement strategies,
// scoring empirical 0-1 decision error against the analytic Bayes costs.

#pragma once

#include <array>
#include <cstdint>

#include "qdecide/decision.hpp"
#include "qdecide/sequential.hpp"

namespace qdecide::montecarlo {

struct SimulationConfig {
    decision::BinaryProblem problem;
    // [1]*N is the fully sequential strategy, [N] the single combined
    // measurement; the group total must match problem.n_particles.
    sequential::Partition strategy;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

struct SimulationResult {
    double error_rate = 0.0;
    double standard_error = 0.0;  // sqrt(p(1-p)/trials)
    std::uint64_t trials = 0;
    // Conditional error frequency given hypothesis 1 / hypothesis 2 true;
    // 0 when a hypothesis was never drawn.
    std::array<double, 2> per_hypothesis_error{0.0, 0.0};
};

// Runs config.trials independent experiments. Each trial draws the true
// hypothesis from the prior, samples outcomes group by group (size-1 groups
// through the adaptive detector-angle biases, larger groups through the
// greedy binary optimal POM against the running posterior) and scores the
// terminal Bayes decision with 0-1 loss.
//
// Determinism: trial i uses its own std::mt19937_64 engine seeded with
// splitmix64(seed + (i + 1) * 0x9e3779b97f4a7c15), so results do not depend
// on execution order; uniform deviates are (engine() >> 11) * 2^-53.
SimulationResult simulate(const SimulationConfig& config);

}  // namespace qdecide::montecarlo
