// Bayesian quantum decision machinery: risk operators, expected cost and the
// optimality conditions for a general M-ary hypothesis set, plus the binary
// specialisation (projective optimum, eigenvalue cost, rank-two closed forms).

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qdecide/complex_matrix.hpp"
#include "qdecide/states.hpp"

namespace qdecide::decision {

struct Hypothesis {
    std::string label;
    states::DensityOperator state;
    double prior;
};

// c(i, j) is the cost of choosing hypothesis i when j is true.
class CostMatrix {
public:
    CostMatrix(std::size_t size, std::vector<double> entries);

    // C_ij = 1 - delta_ij.
    static CostMatrix zero_one(std::size_t size = 2);

    std::size_t size() const noexcept { return size_; }
    double operator()(std::size_t i, std::size_t j) const noexcept {
        return entries_[i * size_ + j];
    }

private:
    std::size_t size_;
    std::vector<double> entries_;
};

// One PSD element per hypothesis, summing to the identity.
struct Pom {
    std::vector<linalg::ComplexMatrix> elements;
};

// Throws std::invalid_argument when an element is non-Hermitian, has an
// eigenvalue below -psd_tol, or the elements fail to sum to the identity.
void validate_pom(const Pom& pom, double hermiticity_tol = 1e-12, double psd_tol = 1e-10,
                  double completeness_tol = 1e-10);

struct OptimalityReport {
    double upsilon_asymmetry = 0.0;
    // Smallest eigenvalue of the Hermitian part of R_j - Upsilon, per hypothesis.
    std::vector<double> min_eigenvalue_excess;
    double tolerance = 0.0;
    bool is_optimal = false;
};

struct BinaryProblem {
    states::PolarisationAngle theta1;
    states::PolarisationAngle theta2;
    double prior_xi;  // prior of hypothesis 1, in [0, 1]
    CostMatrix costs = CostMatrix::zero_one();
    int n_particles = 1;

    // theta1 = +delta, theta2 = -delta with 0-1 costs.
    static BinaryProblem symmetric(double prior_xi, states::HalfAngle delta, int n_particles);

    states::HalfAngle delta() const { return states::HalfAngle::between(theta1, theta2); }
};

// Tr(rho * Pi_j), clamped into [0, 1].
double outcome_probability(const states::DensityOperator& state, const Pom& pom, std::size_t j);

// R_i = sum_j prior_j * c(i, j) * rho_j.
std::vector<linalg::ComplexMatrix> risk_operators(const std::vector<Hypothesis>& hypotheses,
                                                  const CostMatrix& costs);

// sum_i Tr(R_i Pi_i); validates the POM first.
double expected_cost(const std::vector<Hypothesis>& hypotheses, const CostMatrix& costs,
                     const Pom& pom);

linalg::ComplexMatrix upsilon_operator(const std::vector<linalg::ComplexMatrix>& risks,
                                       const Pom& pom);

// Checks self-adjointness of Upsilon = sum_j R_j Pi_j and non-negativity of
// every R_j - Upsilon. Never throws on a failed condition; the report carries
// the findings.
OptimalityReport check_optimality(const std::vector<linalg::ComplexMatrix>& risks, const Pom& pom,
                                  double tol);

// Tr(Upsilon) for a POM that passes check_optimality; throws otherwise,
// pointing the caller at expected_cost.
double bayes_cost_from_upsilon(const std::vector<linalg::ComplexMatrix>& risks, const Pom& pom,
                               double tol = 1e-9);

// gamma = xi (c21 - c11) / ((1 - xi) (c12 - c22)); xi/(1-xi) for 0-1 costs.
double gamma(double prior_xi, const CostMatrix& costs);

inline constexpr double kEigenvalueZeroThreshold = 1e-12;

// Pi_2 projects onto the strictly-positive eigenspace of rho2 - gamma*rho1
// (eigenvalues above kEigenvalueZeroThreshold; zero modes are assigned to
// Pi_1), Pi_1 = I - Pi_2.
Pom binary_optimal_pom(const states::DensityOperator& rho1, const states::DensityOperator& rho2,
                       double prior_xi, const CostMatrix& costs);

// Bayes cost through the eigendecomposition of rho2 - gamma*rho1. Degenerate
// priors (xi in {0, 1}) skip the measurement and return the best
// prior-weighted decision cost.
double binary_bayes_cost_eigen(const BinaryProblem& problem);

// The two nonzero eigenvalues of rho2 - gamma*rho1 for pure states with
// squared overlap delta_sq; returned as (lambda_plus, lambda_minus).
std::pair<double, double> rank2_eigenvalues(double gamma, double delta_sq);

// 0-1 Bayes cost of the single combined measurement on N particles:
// (1 - sqrt(1 - 4 xi (1-xi) cos^(2N) delta)) / 2, evaluated in a form that
// stays exact when the radicand approaches 1.
double combined_cost_closed(double prior_xi, states::HalfAngle delta, int n_particles);

}  // namespace qdecide::decision
