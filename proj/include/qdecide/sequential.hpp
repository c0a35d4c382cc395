// Adaptive sequential measurement of the spin ensemble: per-particle detector
// optimisation, Bayes posterior updates, brute-force enumeration of the
// posterior tree, and grouped (partitioned) strategies that interpolate
// between fully sequential and fully combined measurements.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdecide/states.hpp"

namespace qdecide::sequential {

// Probability of the spin-up outcome when the state is polarised along
// theta_k and the detector points along phi: cos^2((theta_k - phi) / 2).
double bias(states::PolarisationAngle theta_k, double phi);

// Detector angle minimising the one-step expected cost at the given prior,
// in [0, 2*pi). Accepts the full prior range [0, 1]; throws
// std::domain_error only for the genuinely degenerate configuration
// (identical hypothesis angles at prior 1/2) where every direction is
// equally uninformative.
double optimal_angle(double prior_xi, states::PolarisationAngle theta1,
                     states::PolarisationAngle theta2);

// Expected 0-1 cost of measuring along phi and then deciding by Bayes rule
// on the outcome: sum over outcomes of the smaller posterior-weighted cost.
double one_step_cost(double prior_xi, states::PolarisationAngle theta1,
                     states::PolarisationAngle theta2, double phi);

// Bayes update of the prior on hypothesis 1 given coin biases b1, b2 and an
// outcome of +1 (spin up) or -1 (spin down). Throws std::domain_error when
// the outcome has zero probability under both hypotheses.
double posterior_update(double prior_xi, double b1, double b2, int outcome);

// Closed form of the two posterior values the adaptive tree recombines to
// after n_observations completed measurements:
//   (1 ± sqrt(1 - 4 xi (1-xi) cos^(2n) delta)) / 2.
// The exponent counts completed observations, which is the indexing that
// composes with posterior_update (one update reproduces n = 1) and matches
// tree depth directly.
double closed_posterior(double prior_xi, int n_observations, int sign, states::HalfAngle delta);

// 0-1 Bayes cost of N adaptive single-particle measurements:
// (1 - sqrt(1 - 4 xi (1-xi) cos^(2N) delta)) / 2.
double sequential_cost_closed(double prior_xi, states::HalfAngle delta, int n_particles);

// One path through the measurement tree.
struct PosteriorBranch {
    std::vector<std::int8_t> outcomes;    // +1 / -1 per step
    double weight = 0.0;                  // mixture path probability
    double posterior = 0.0;               // P(hypothesis 1 | outcomes)
    std::vector<double> detector_angles;  // phi used at each step
};

struct TreeOptions {
    int enumeration_cap = 20;   // 2^20 branches; the closed form covers larger N
    bool collect_leaves = true; // distinct posteriors and cost are always computed
    // Branches whose mixture probability falls to this level are dropped along
    // with exactly-impossible outcomes: at such weights the posterior carries
    // no significant digits (they arise as rounding residue of probability-zero
    // outcomes). Set to 0 to keep every representable branch.
    double prune_weight = 1e-28;
};

struct TreeEnumeration {
    std::vector<PosteriorBranch> leaves;
    double bayes_cost = 0.0;
    // distinct_posteriors[d - 1] holds the distinct posterior values observed
    // at depth d (1e-10 merge tolerance), in first-seen order.
    std::vector<std::vector<double>> distinct_posteriors;
};

// Expands every outcome sequence, re-deriving the optimal detector angle
// from the running posterior at each step. Branch weights are carried as
// per-hypothesis path products (mixture form); zero-probability outcomes are
// pruned. Leaves are visited depth-first with the spin-up branch first, and
// the weighted cost accumulates in that fixed order.
TreeEnumeration enumerate_tree(double prior_xi, states::PolarisationAngle theta1,
                               states::PolarisationAngle theta2, int n_particles,
                               const TreeOptions& options = {});

// Ordered sub-ensemble sizes; the groups are measured in sequence.
class Partition {
public:
    explicit Partition(std::vector<int> groups);

    static Partition singles(int n_particles);   // [1, 1, ..., 1]
    static Partition combined(int n_particles);  // [n]

    const std::vector<int>& groups() const noexcept { return groups_; }
    int total_particles() const noexcept { return total_; }

    // "2+1" style rendering.
    std::string to_string() const;

private:
    std::vector<int> groups_;
    int total_;
};

// Expected 0-1 cost of measuring the groups in order, each with the greedy
// binary optimal POM against the running posterior; the final group
// contributes its binary Bayes cost directly.
double partition_cost(double prior_xi, states::PolarisationAngle theta1,
                      states::PolarisationAngle theta2, const Partition& partition);

// Linear-utility total: decision cost plus a per-measurement charge.
double total_cost_with_observation(double decision_cost, int measurement_events,
                                   double per_measurement_cost);

}  // namespace qdecide::sequential
