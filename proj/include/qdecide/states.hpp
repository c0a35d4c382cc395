// Quantum states for the polarised spin-1/2 ensemble problem: single-qubit
// density operators, the spin-N/2 combined density operator in the
// (N+1)-dimensional symmetric representation, and the amplitude vectors
// they factor through.

#pragma once

#include <vector>

#include "qdecide/complex_matrix.hpp"

namespace qdecide::states {

inline constexpr int kDenseCap = 512;  // largest particle count stored densely

// Polarisation direction in the x-y plane, radians from the x-axis,
// canonicalised to [0, 2*pi).
class PolarisationAngle {
public:
    PolarisationAngle() : theta_(0.0) {}
    explicit PolarisationAngle(double theta_radians);

    double radians() const noexcept { return theta_; }

private:
    double theta_;
};

// Half the angular separation of the two candidate polarisations,
// |theta2 - theta1| = 2*delta, canonicalised into [0, pi/2]. Inputs within
// 1e-9 of the endpoints (decimal renderings of pi/2) are clamped.
class HalfAngle {
public:
    explicit HalfAngle(double delta_radians);

    static HalfAngle between(PolarisationAngle theta1, PolarisationAngle theta2);

    double radians() const noexcept { return delta_; }

    // cos(delta), exact 0 at the orthogonal endpoint where the double cosine
    // cannot represent it.
    double cosine() const noexcept;

private:
    double delta_;
};

// Pure unit-trace Hermitian PSD matrix of dimension particle_count + 1.
struct DensityOperator {
    linalg::ComplexMatrix matrix;
    int particle_count;
};

// u_n = 2^(-N/2) * sqrt(C(N,n)) * e^{i n theta}; unit Euclidean norm.
struct AmplitudeVector {
    std::vector<linalg::Complex> entries;

    int particle_count() const noexcept { return static_cast<int>(entries.size()) - 1; }
};

DensityOperator qubit_density(PolarisationAngle theta);

// Entry (m, n) = 2^(-N) * sqrt(C(N,m) C(N,n)) * e^{-i (m-n) theta}.
// Binomial factors are evaluated in the log domain so large N stays finite.
DensityOperator ensemble_density(PolarisationAngle theta, int n_particles);

AmplitudeVector amplitude_vector(PolarisationAngle theta, int n_particles);

// Squared overlap of the two N-particle hypothesis states: cos^(2N)(delta).
double overlap_delta_squared(HalfAngle delta, int n_particles);

// Same quantity through the binomial sum |2^-N sum_m C(N,m) e^{2 i m delta}|^2;
// kept as an independent route for verification.
double overlap_delta_squared_binomial(HalfAngle delta, int n_particles);

}  // namespace qdecide::states
