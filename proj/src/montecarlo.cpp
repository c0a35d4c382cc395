#include "qdecide/montecarlo.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>

namespace qdecide::montecarlo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Outcome likelihoods of the greedy binary optimal POM for one group,
// memoised on (group index, posterior bits) within a simulation run.
struct GroupLikelihoods {
    double up_h1;  // P(outcome 1 | hypothesis 1)
    double up_h2;  // P(outcome 1 | hypothesis 2)
};

}  // namespace

SimulationResult simulate(const SimulationConfig& config) {
    if (config.trials < 1) {
        throw std::invalid_argument("simulate: need at least one trial");
    }
    if (config.strategy.total_particles() != config.problem.n_particles) {
        throw std::invalid_argument(
            "simulate: partition total does not match the problem's particle count");
    }
    const decision::BinaryProblem& problem = config.problem;
    const double xi = problem.prior_xi;
    if (!(xi >= 0.0 && xi <= 1.0)) {
        throw std::invalid_argument("simulate: prior must lie in [0, 1]");
    }
    const auto& groups = config.strategy.groups();
    const decision::CostMatrix& costs = problem.costs;

    std::map<std::pair<std::size_t, std::uint64_t>, GroupLikelihoods> pom_cache;
    const auto group_likelihoods = [&](std::size_t index, double posterior) {
        std::uint64_t key_bits;
        static_assert(sizeof(key_bits) == sizeof(posterior));
        std::memcpy(&key_bits, &posterior, sizeof(key_bits));
        const auto key = std::make_pair(index, key_bits);
        auto it = pom_cache.find(key);
        if (it == pom_cache.end()) {
            const int g = groups[index];
            const auto rho1 = states::ensemble_density(problem.theta1, g);
            const auto rho2 = states::ensemble_density(problem.theta2, g);
            const auto pom = decision::binary_optimal_pom(rho1, rho2, posterior, costs);
            it = pom_cache
                     .emplace(key, GroupLikelihoods{decision::outcome_probability(rho1, pom, 0),
                                                    decision::outcome_probability(rho2, pom, 0)})
                     .first;
        }
        return it->second;
    };

    std::uint64_t error_count = 0;
    std::array<std::uint64_t, 2> hypothesis_trials{0, 0};
    std::array<std::uint64_t, 2> hypothesis_errors{0, 0};

    for (std::uint64_t trial = 0; trial < config.trials; ++trial) {
        std::mt19937_64 engine(splitmix64(config.seed + (trial + 1) * 0x9e3779b97f4a7c15ULL));

        const bool truth_is_h1 = uniform01(engine) < xi;
        double posterior = xi;

        for (std::size_t index = 0; index < groups.size(); ++index) {
            if (posterior == 0.0 || posterior == 1.0) {
                break;  // absorbed; further outcomes cannot move the posterior
            }
            if (groups[index] == 1) {
                const double phi =
                    sequential::optimal_angle(posterior, problem.theta1, problem.theta2);
                const double b1 = sequential::bias(problem.theta1, phi);
                const double b2 = sequential::bias(problem.theta2, phi);
                const double b_true = truth_is_h1 ? b1 : b2;
                const int outcome = uniform01(engine) < b_true ? +1 : -1;
                posterior = sequential::posterior_update(posterior, b1, b2, outcome);
            } else {
                const GroupLikelihoods lk = group_likelihoods(index, posterior);
                const double p_up_true = truth_is_h1 ? lk.up_h1 : lk.up_h2;
                const bool up = uniform01(engine) < p_up_true;
                const double l1 = up ? lk.up_h1 : 1.0 - lk.up_h1;
                const double l2 = up ? lk.up_h2 : 1.0 - lk.up_h2;
                posterior = l1 * posterior / (l1 * posterior + l2 * (1.0 - posterior));
            }
        }

        const double cost_pick1 = posterior * costs(0, 0) + (1.0 - posterior) * costs(0, 1);
        const double cost_pick2 = posterior * costs(1, 0) + (1.0 - posterior) * costs(1, 1);
        const bool decide_h1 = cost_pick1 <= cost_pick2;

        const bool error = decide_h1 != truth_is_h1;
        const std::size_t h = truth_is_h1 ? 0 : 1;
        ++hypothesis_trials[h];
        if (error) {
            ++error_count;
            ++hypothesis_errors[h];
        }
    }

    SimulationResult result;
    result.trials = config.trials;
    result.error_rate = static_cast<double>(error_count) / static_cast<double>(config.trials);
    result.standard_error = std::sqrt(result.error_rate * (1.0 - result.error_rate) /
                                      static_cast<double>(config.trials));
    for (std::size_t h = 0; h < 2; ++h) {
        result.per_hypothesis_error[h] =
            hypothesis_trials[h] == 0 ? 0.0
                                      : static_cast<double>(hypothesis_errors[h]) /
                                            static_cast<double>(hypothesis_trials[h]);
    }
    return result;
}

}  // namespace qdecide::montecarlo
