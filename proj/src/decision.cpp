#include "qdecide/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qdecide::decision {

using linalg::Complex;
using linalg::ComplexMatrix;

namespace {

// Stable evaluation of (1 - sqrt(1 - x)) / 2 for x in [0, 1]; the naive form
// loses everything below ~1e-16.
double half_one_minus_sqrt(double x) {
    return x / (2.0 * (1.0 + std::sqrt(1.0 - x)));
}

void check_priors(const std::vector<Hypothesis>& hypotheses) {
    if (hypotheses.empty()) {
        throw std::invalid_argument("hypothesis set is empty");
    }
    double sum = 0.0;
    const std::size_t dim = hypotheses.front().state.matrix.dim();
    for (const Hypothesis& h : hypotheses) {
        if (h.prior < -1e-12 || h.prior > 1.0 + 1e-12) {
            throw std::invalid_argument("prior outside [0, 1] for hypothesis " + h.label);
        }
        if (h.state.matrix.dim() != dim) {
            throw std::invalid_argument("hypothesis states have mismatched dimensions");
        }
        sum += h.prior;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "priors sum to " << sum << ", expected 1";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

CostMatrix::CostMatrix(std::size_t size, std::vector<double> entries)
    : size_(size), entries_(std::move(entries)) {
    if (size_ == 0 || entries_.size() != size_ * size_) {
        throw std::invalid_argument("CostMatrix: entry count does not match size");
    }
    for (double c : entries_) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("CostMatrix: entries must be finite");
        }
    }
}

CostMatrix CostMatrix::zero_one(std::size_t size) {
    std::vector<double> entries(size * size, 1.0);
    for (std::size_t i = 0; i < size; ++i) {
        entries[i * size + i] = 0.0;
    }
    return CostMatrix(size, std::move(entries));
}

void validate_pom(const Pom& pom, double hermiticity_tol, double psd_tol,
                  double completeness_tol) {
    if (pom.elements.empty()) {
        throw std::invalid_argument("POM has no elements");
    }
    const std::size_t dim = pom.elements.front().dim();
    ComplexMatrix sum(dim);
    for (std::size_t j = 0; j < pom.elements.size(); ++j) {
        const ComplexMatrix& e = pom.elements[j];
        if (e.dim() != dim) {
            throw std::invalid_argument("POM elements have mismatched dimensions");
        }
        const double asym = e.hermiticity_error();
        if (asym > hermiticity_tol) {
            std::ostringstream msg;
            msg << "POM element " << j << " is not Hermitian (asymmetry " << asym << ")";
            throw std::invalid_argument(msg.str());
        }
        const auto eig = linalg::hermitian_eigen(e);
        if (eig.eigenvalues.front() < -psd_tol) {
            std::ostringstream msg;
            msg << "POM element " << j << " is not PSD (min eigenvalue "
                << eig.eigenvalues.front() << ")";
            throw std::invalid_argument(msg.str());
        }
        sum += e;
    }
    const double completeness = sum.max_abs_diff(ComplexMatrix::identity(dim));
    if (completeness > completeness_tol) {
        std::ostringstream msg;
        msg << "POM elements do not sum to identity (max deviation " << completeness << ")";
        throw std::invalid_argument(msg.str());
    }
}

BinaryProblem BinaryProblem::symmetric(double prior_xi, states::HalfAngle delta, int n_particles) {
    return BinaryProblem{states::PolarisationAngle(delta.radians()),
                         states::PolarisationAngle(-delta.radians()), prior_xi,
                         CostMatrix::zero_one(), n_particles};
}

double outcome_probability(const states::DensityOperator& state, const Pom& pom, std::size_t j) {
    if (j >= pom.elements.size()) {
        throw std::invalid_argument("POM element index out of range");
    }
    const ComplexMatrix& pi = pom.elements[j];
    const ComplexMatrix& rho = state.matrix;
    if (pi.dim() != rho.dim()) {
        throw std::invalid_argument("outcome_probability: dimension mismatch");
    }
    Complex t{};
    for (std::size_t m = 0; m < rho.dim(); ++m) {
        for (std::size_t n = 0; n < rho.dim(); ++n) {
            t += rho(m, n) * pi(n, m);
        }
    }
    return std::clamp(t.real(), 0.0, 1.0);
}

std::vector<ComplexMatrix> risk_operators(const std::vector<Hypothesis>& hypotheses,
                                          const CostMatrix& costs) {
    check_priors(hypotheses);
    if (costs.size() != hypotheses.size()) {
        throw std::invalid_argument("cost matrix size does not match hypothesis count");
    }
    const std::size_t dim = hypotheses.front().state.matrix.dim();
    std::vector<ComplexMatrix> risks;
    risks.reserve(hypotheses.size());
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        ComplexMatrix r(dim);
        for (std::size_t j = 0; j < hypotheses.size(); ++j) {
            const double w = hypotheses[j].prior * costs(i, j);
            if (w != 0.0) {
                r += w * hypotheses[j].state.matrix;
            }
        }
        risks.push_back(std::move(r));
    }
    return risks;
}

double expected_cost(const std::vector<Hypothesis>& hypotheses, const CostMatrix& costs,
                     const Pom& pom) {
    if (pom.elements.size() != hypotheses.size()) {
        throw std::invalid_argument("POM element count does not match hypothesis count");
    }
    validate_pom(pom);
    const auto risks = risk_operators(hypotheses, costs);
    Complex total{};
    for (std::size_t i = 0; i < risks.size(); ++i) {
        total += trace(matmul(risks[i], pom.elements[i]));
    }
    return total.real();
}

ComplexMatrix upsilon_operator(const std::vector<ComplexMatrix>& risks, const Pom& pom) {
    if (risks.size() != pom.elements.size() || risks.empty()) {
        throw std::invalid_argument("risk operator count does not match POM");
    }
    ComplexMatrix upsilon(risks.front().dim());
    for (std::size_t j = 0; j < risks.size(); ++j) {
        upsilon += matmul(risks[j], pom.elements[j]);
    }
    return upsilon;
}

OptimalityReport check_optimality(const std::vector<ComplexMatrix>& risks, const Pom& pom,
                                  double tol) {
    const ComplexMatrix upsilon = upsilon_operator(risks, pom);
    OptimalityReport report;
    report.tolerance = tol;
    report.upsilon_asymmetry = upsilon.hermiticity_error();

    // Excesses are evaluated against the Hermitian part of Upsilon so the
    // report stays well-defined when the POM is far from optimal.
    const std::size_t dim = upsilon.dim();
    ComplexMatrix upsilon_h(dim);
    {
        const ComplexMatrix adj = upsilon.adjoint();
        upsilon_h = upsilon;
        upsilon_h += adj;
        upsilon_h *= Complex(0.5, 0.0);
    }

    report.min_eigenvalue_excess.reserve(risks.size());
    for (const ComplexMatrix& r : risks) {
        ComplexMatrix diff = r;
        diff -= upsilon_h;
        const auto eig = linalg::hermitian_eigen(diff);
        report.min_eigenvalue_excess.push_back(eig.eigenvalues.front());
    }

    report.is_optimal = report.upsilon_asymmetry <= tol &&
                        std::all_of(report.min_eigenvalue_excess.begin(),
                                    report.min_eigenvalue_excess.end(),
                                    [tol](double e) { return e >= -tol; });
    return report;
}

double bayes_cost_from_upsilon(const std::vector<ComplexMatrix>& risks, const Pom& pom,
                               double tol) {
    const OptimalityReport report = check_optimality(risks, pom, tol);
    if (!report.is_optimal) {
        std::ostringstream msg;
        msg << "POM fails the optimality conditions (Upsilon asymmetry "
            << report.upsilon_asymmetry << ", min excess "
            << *std::min_element(report.min_eigenvalue_excess.begin(),
                                 report.min_eigenvalue_excess.end())
            << "); use expected_cost for suboptimal strategies";
        throw std::runtime_error(msg.str());
    }
    return trace(upsilon_operator(risks, pom)).real();
}

double gamma(double prior_xi, const CostMatrix& costs) {
    if (costs.size() != 2) {
        throw std::invalid_argument("gamma is defined for binary cost matrices");
    }
    if (!(prior_xi > 0.0 && prior_xi < 1.0)) {
        throw std::domain_error("gamma undefined for degenerate prior");
    }
    const double num = costs(1, 0) - costs(0, 0);
    const double den = costs(0, 1) - costs(1, 1);
    if (!(num > 0.0) || !(den > 0.0)) {
        throw std::invalid_argument("cost matrix must satisfy c21 > c11 and c12 > c22");
    }
    return prior_xi * num / ((1.0 - prior_xi) * den);
}

Pom binary_optimal_pom(const states::DensityOperator& rho1, const states::DensityOperator& rho2,
                       double prior_xi, const CostMatrix& costs) {
    if (rho1.matrix.dim() != rho2.matrix.dim()) {
        throw std::invalid_argument("binary_optimal_pom: dimension mismatch");
    }
    const double g = gamma(prior_xi, costs);
    ComplexMatrix d = rho2.matrix;
    d -= g * rho1.matrix;
    const auto eig = linalg::hermitian_eigen(d);

    const std::size_t dim = d.dim();
    ComplexMatrix pi2(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        if (eig.eigenvalues[k] <= kEigenvalueZeroThreshold) {
            continue;  // zero modes go to Pi_1
        }
        for (std::size_t m = 0; m < dim; ++m) {
            for (std::size_t n = 0; n < dim; ++n) {
                pi2(m, n) += eig.eigenvectors(m, k) * std::conj(eig.eigenvectors(n, k));
            }
        }
    }
    ComplexMatrix pi1 = ComplexMatrix::identity(dim);
    pi1 -= pi2;
    return Pom{{std::move(pi1), std::move(pi2)}};
}

double binary_bayes_cost_eigen(const BinaryProblem& problem) {
    const CostMatrix& c = problem.costs;
    const double xi = problem.prior_xi;
    if (!(xi >= 0.0 && xi <= 1.0)) {
        throw std::invalid_argument("prior must lie in [0, 1]");
    }
    if (xi == 0.0 || xi == 1.0) {
        // Decision without measurement.
        const double cost_pick1 = xi * c(0, 0) + (1.0 - xi) * c(0, 1);
        const double cost_pick2 = xi * c(1, 0) + (1.0 - xi) * c(1, 1);
        return std::min(cost_pick1, cost_pick2);
    }

    const auto rho1 = states::ensemble_density(problem.theta1, problem.n_particles);
    const auto rho2 = states::ensemble_density(problem.theta2, problem.n_particles);
    const double g = gamma(xi, c);
    ComplexMatrix d = rho2.matrix;
    d -= g * rho1.matrix;
    const auto eig = linalg::hermitian_eigen(d);
    double positive_sum = 0.0;
    for (double eta : eig.eigenvalues) {
        if (eta > kEigenvalueZeroThreshold) {
            positive_sum += eta;
        }
    }
    return xi * c(0, 0) + (1.0 - xi) * c(0, 1) - (1.0 - xi) * (c(0, 1) - c(1, 1)) * positive_sum;
}

std::pair<double, double> rank2_eigenvalues(double gamma, double delta_sq) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("rank2_eigenvalues: gamma must be positive");
    }
    if (!(delta_sq >= 0.0 && delta_sq <= 1.0)) {
        throw std::invalid_argument("rank2_eigenvalues: delta_sq must lie in [0, 1]");
    }
    const double b = 1.0 - gamma;
    const double disc = b * b - 4.0 * gamma * (delta_sq - 1.0);
    const double root = std::sqrt(std::max(disc, 0.0));
    return {0.5 * (b + root), 0.5 * (b - root)};
}

double combined_cost_closed(double prior_xi, states::HalfAngle delta, int n_particles) {
    if (!(prior_xi >= 0.0 && prior_xi <= 1.0)) {
        throw std::invalid_argument("prior must lie in [0, 1]");
    }
    if (n_particles < 1) {
        throw std::invalid_argument("particle count must be >= 1");
    }
    const double overlap = std::pow(delta.cosine(), 2 * n_particles);
    return half_one_minus_sqrt(4.0 * prior_xi * (1.0 - prior_xi) * overlap);
}

}  // namespace qdecide::decision
