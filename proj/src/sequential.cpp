#include "qdecide/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qdecide/decision.hpp"

namespace qdecide::sequential {

using states::HalfAngle;
using states::PolarisationAngle;

namespace {

double half_one_minus_sqrt(double x) {
    return x / (2.0 * (1.0 + std::sqrt(1.0 - x)));
}

void check_prior(double xi) {
    if (!(xi >= 0.0 && xi <= 1.0)) {
        throw std::invalid_argument("prior must lie in [0, 1]");
    }
}

void insert_distinct(std::vector<double>& values, double x, double tol) {
    for (double v : values) {
        if (std::abs(v - x) <= tol) {
            return;
        }
    }
    values.push_back(x);
}

}  // namespace

double bias(PolarisationAngle theta_k, double phi) {
    const double c = std::cos((theta_k.radians() - phi) / 2.0);
    return c * c;
}

double optimal_angle(double prior_xi, PolarisationAngle theta1, PolarisationAngle theta2) {
    check_prior(prior_xi);
    const double t1 = theta1.radians();
    const double t2 = theta2.radians();
    const double a = prior_xi * std::cos(t1) - (1.0 - prior_xi) * std::cos(t2);
    const double b = prior_xi * std::sin(t1) - (1.0 - prior_xi) * std::sin(t2);
    if (std::abs(a) < 1e-15 && std::abs(b) < 1e-15) {
        throw std::domain_error(
            "optimal_angle: degenerate configuration (identical hypothesis angles at prior "
            "1/2); every detector direction is equally uninformative");
    }
    return PolarisationAngle(std::atan2(b, a)).radians();
}

double one_step_cost(double prior_xi, PolarisationAngle theta1, PolarisationAngle theta2,
                     double phi) {
    check_prior(prior_xi);
    const double b1 = bias(theta1, phi);
    const double b2 = bias(theta2, phi);
    const double up = std::min(prior_xi * b1, (1.0 - prior_xi) * b2);
    const double down = std::min(prior_xi * (1.0 - b1), (1.0 - prior_xi) * (1.0 - b2));
    return up + down;
}

double posterior_update(double prior_xi, double b1, double b2, int outcome) {
    check_prior(prior_xi);
    if (!(b1 >= 0.0 && b1 <= 1.0 && b2 >= 0.0 && b2 <= 1.0)) {
        throw std::invalid_argument("biases must lie in [0, 1]");
    }
    if (outcome != 1 && outcome != -1) {
        throw std::invalid_argument("outcome must be +1 or -1");
    }
    const double l1 = outcome == 1 ? b1 : 1.0 - b1;
    const double l2 = outcome == 1 ? b2 : 1.0 - b2;
    const double den = l1 * prior_xi + l2 * (1.0 - prior_xi);
    if (den <= 0.0) {
        std::ostringstream msg;
        msg << "posterior_update: outcome '" << (outcome == 1 ? '+' : '-')
            << "' has zero probability under both hypotheses";
        throw std::domain_error(msg.str());
    }
    return l1 * prior_xi / den;
}

double closed_posterior(double prior_xi, int n_observations, int sign, HalfAngle delta) {
    check_prior(prior_xi);
    if (n_observations < 1) {
        throw std::invalid_argument("closed_posterior: need at least one observation");
    }
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("closed_posterior: sign must be +1 or -1");
    }
    const double x = 4.0 * prior_xi * (1.0 - prior_xi) *
                     std::pow(delta.cosine(), 2 * n_observations);
    if (sign == 1) {
        return 0.5 * (1.0 + std::sqrt(1.0 - x));
    }
    return half_one_minus_sqrt(x);
}

double sequential_cost_closed(double prior_xi, HalfAngle delta, int n_particles) {
    check_prior(prior_xi);
    if (n_particles < 1) {
        throw std::invalid_argument("particle count must be >= 1");
    }
    const double x = 4.0 * prior_xi * (1.0 - prior_xi) *
                     std::pow(delta.cosine(), 2 * n_particles);
    return half_one_minus_sqrt(x);
}

namespace {

struct TreeWalker {
    PolarisationAngle theta1;
    PolarisationAngle theta2;
    int depth_target;
    bool collect_leaves;
    double prune_weight;

    TreeEnumeration result;
    std::vector<std::int8_t> outcomes;
    std::vector<double> angles;

    // weight_h1/h2 are the per-hypothesis path products xi * prod(likelihoods)
    // and (1-xi) * prod(likelihoods); their sum is the branch weight.
    void walk(double posterior, double weight_h1, double weight_h2, int depth) {
        if (depth == depth_target) {
            result.bayes_cost +=
                (weight_h1 + weight_h2) * std::min(posterior, 1.0 - posterior);
            if (collect_leaves) {
                result.leaves.push_back(
                    PosteriorBranch{outcomes, weight_h1 + weight_h2, posterior, angles});
            }
            return;
        }
        const double phi = optimal_angle(posterior, theta1, theta2);
        // Spin-down likelihoods as sin^2 rather than 1 - cos^2: the
        // subtraction destroys the relative precision of near-certain
        // branches and breaks the exact two-value recombination.
        const double half1 = (theta1.radians() - phi) / 2.0;
        const double half2 = (theta2.radians() - phi) / 2.0;
        const double up1 = std::cos(half1) * std::cos(half1);
        const double up2 = std::cos(half2) * std::cos(half2);
        const double down1 = std::sin(half1) * std::sin(half1);
        const double down2 = std::sin(half2) * std::sin(half2);
        for (int outcome : {+1, -1}) {
            const double l1 = outcome == 1 ? up1 : down1;
            const double l2 = outcome == 1 ? up2 : down2;
            const double w1 = weight_h1 * l1;
            const double w2 = weight_h2 * l2;
            if (w1 + w2 <= prune_weight) {
                continue;  // impossible (or numerically vanished) outcome; prune
            }
            // Bayes rule composed over the whole path; equal to iterating the
            // single-step update but immune to the parent posterior rounding
            // to exactly 0 or 1 while a branch weight is still positive.
            const double next = w1 / (w1 + w2);
            insert_distinct(result.distinct_posteriors[depth], next, 1e-10);
            outcomes.push_back(static_cast<std::int8_t>(outcome));
            angles.push_back(phi);
            walk(next, w1, w2, depth + 1);
            outcomes.pop_back();
            angles.pop_back();
        }
    }
};

}  // namespace

TreeEnumeration enumerate_tree(double prior_xi, PolarisationAngle theta1,
                               PolarisationAngle theta2, int n_particles,
                               const TreeOptions& options) {
    check_prior(prior_xi);
    if (n_particles < 1) {
        throw std::invalid_argument("particle count must be >= 1");
    }
    if (n_particles > options.enumeration_cap) {
        std::ostringstream msg;
        msg << "enumerate_tree: " << n_particles << " particles exceeds the enumeration cap "
            << options.enumeration_cap;
        throw std::invalid_argument(msg.str());
    }

    TreeWalker walker{theta1,  theta2, n_particles, options.collect_leaves,
                      options.prune_weight, {},     {},          {}};
    walker.result.distinct_posteriors.resize(n_particles);
    if (options.collect_leaves) {
        walker.result.leaves.reserve(std::size_t{1} << std::min(n_particles, 20));
    }
    walker.walk(prior_xi, prior_xi, 1.0 - prior_xi, 0);
    return walker.result;
}

Partition::Partition(std::vector<int> groups) : groups_(std::move(groups)), total_(0) {
    if (groups_.empty()) {
        throw std::invalid_argument("partition must contain at least one group");
    }
    for (int g : groups_) {
        if (g < 1) {
            throw std::invalid_argument("partition groups must be >= 1");
        }
        total_ += g;
    }
}

Partition Partition::singles(int n_particles) {
    if (n_particles < 1) {
        throw std::invalid_argument("particle count must be >= 1");
    }
    return Partition(std::vector<int>(n_particles, 1));
}

Partition Partition::combined(int n_particles) {
    return Partition(std::vector<int>{n_particles});
}

std::string Partition::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        if (i > 0) {
            out << '+';
        }
        out << groups_[i];
    }
    return out.str();
}

namespace {

double partition_cost_recursive(double posterior, states::PolarisationAngle theta1,
                                states::PolarisationAngle theta2,
                                const std::vector<int>& groups, std::size_t index) {
    if (posterior == 0.0 || posterior == 1.0) {
        return 0.0;  // absorbed: the remaining measurements cannot change the decision
    }
    const int g = groups[index];
    if (index + 1 == groups.size()) {
        return decision::binary_bayes_cost_eigen(decision::BinaryProblem{
            theta1, theta2, posterior, decision::CostMatrix::zero_one(), g});
    }
    const auto rho1 = states::ensemble_density(theta1, g);
    const auto rho2 = states::ensemble_density(theta2, g);
    const auto pom =
        decision::binary_optimal_pom(rho1, rho2, posterior, decision::CostMatrix::zero_one());
    double total = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        const double p1 = decision::outcome_probability(rho1, pom, j);
        const double p2 = decision::outcome_probability(rho2, pom, j);
        const double mixture = posterior * p1 + (1.0 - posterior) * p2;
        if (mixture <= 0.0) {
            continue;
        }
        const double next = posterior * p1 / mixture;
        total += mixture * partition_cost_recursive(next, theta1, theta2, groups, index + 1);
    }
    return total;
}

}  // namespace

double partition_cost(double prior_xi, PolarisationAngle theta1, PolarisationAngle theta2,
                      const Partition& partition) {
    check_prior(prior_xi);
    return partition_cost_recursive(prior_xi, theta1, theta2, partition.groups(), 0);
}

double total_cost_with_observation(double decision_cost, int measurement_events,
                                   double per_measurement_cost) {
    if (decision_cost < 0.0 || measurement_events < 0 || per_measurement_cost < 0.0) {
        throw std::invalid_argument("total_cost_with_observation: arguments must be non-negative");
    }
    return decision_cost + measurement_events * per_measurement_cost;
}

}  // namespace qdecide::sequential
