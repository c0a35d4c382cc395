#include "qdecide/states.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qdecide::states {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_to_half_open(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) {
        y += kTwoPi;
    }
    if (y >= kTwoPi) {  // fmod rounding can land exactly on 2*pi
        y -= kTwoPi;
    }
    return y;
}

// Wrap into (-pi, pi].
double wrap_signed(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y > std::numbers::pi) {
        y -= kTwoPi;
    } else if (y <= -std::numbers::pi) {
        y += kTwoPi;
    }
    return y;
}

void check_particle_count(int n_particles) {
    if (n_particles < 1) {
        throw std::invalid_argument("particle count must be >= 1");
    }
    if (n_particles > kDenseCap) {
        std::ostringstream msg;
        msg << "particle count " << n_particles << " exceeds dense cap " << kDenseCap;
        throw std::invalid_argument(msg.str());
    }
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

PolarisationAngle::PolarisationAngle(double theta_radians) {
    if (!std::isfinite(theta_radians)) {
        throw std::invalid_argument("polarisation angle must be finite");
    }
    theta_ = wrap_to_half_open(theta_radians);
}

HalfAngle::HalfAngle(double delta_radians) : delta_(delta_radians) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    constexpr double slack = 1e-9;
    if (!(delta_radians >= -slack && delta_radians <= half_pi + slack)) {
        std::ostringstream msg;
        msg << "half-angle " << delta_radians << " outside [0, pi/2]";
        throw std::invalid_argument(msg.str());
    }
    delta_ = std::clamp(delta_radians, 0.0, half_pi);
}

HalfAngle HalfAngle::between(PolarisationAngle theta1, PolarisationAngle theta2) {
    return HalfAngle(std::abs(wrap_signed(theta2.radians() - theta1.radians())) / 2.0);
}

double HalfAngle::cosine() const noexcept {
    return delta_ == std::numbers::pi / 2.0 ? 0.0 : std::cos(delta_);
}

DensityOperator qubit_density(PolarisationAngle theta) {
    linalg::ComplexMatrix m(2);
    const double t = theta.radians();
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(0, 1) = 0.5 * std::polar(1.0, t);   // e^{-i(0-1)theta}
    m(1, 0) = 0.5 * std::polar(1.0, -t);  // e^{-i(1-0)theta}
    return DensityOperator{std::move(m), 1};
}

DensityOperator ensemble_density(PolarisationAngle theta, int n_particles) {
    check_particle_count(n_particles);
    const int n = n_particles;
    const double t = theta.radians();
    const double log2 = std::numbers::ln2;

    std::vector<double> half_log_weight(n + 1);
    for (int k = 0; k <= n; ++k) {
        half_log_weight[k] = 0.5 * (log_binomial(n, k) - n * log2);
    }

    linalg::ComplexMatrix out(static_cast<std::size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) {
        for (int k = 0; k <= n; ++k) {
            const double magnitude = std::exp(half_log_weight[m] + half_log_weight[k]);
            out(m, k) = magnitude * std::polar(1.0, -(m - k) * t);
        }
    }
    return DensityOperator{std::move(out), n};
}

AmplitudeVector amplitude_vector(PolarisationAngle theta, int n_particles) {
    check_particle_count(n_particles);
    const int n = n_particles;
    const double t = theta.radians();

    AmplitudeVector u;
    u.entries.resize(n + 1);
    double norm_sq = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double magnitude = std::exp(0.5 * (log_binomial(n, k) - n * std::numbers::ln2));
        u.entries[k] = magnitude * std::polar(1.0, k * t);
        norm_sq += magnitude * magnitude;
    }
    assert(std::abs(norm_sq - 1.0) <= 1e-12);
    (void)norm_sq;
    return u;
}

double overlap_delta_squared(HalfAngle delta, int n_particles) {
    check_particle_count(n_particles);
    const double value = std::pow(delta.cosine(), 2 * n_particles);
    assert(std::abs(value - overlap_delta_squared_binomial(delta, n_particles)) <= 1e-12);
    return value;
}

double overlap_delta_squared_binomial(HalfAngle delta, int n_particles) {
    check_particle_count(n_particles);
    const int n = n_particles;
    const double d = delta.radians();
    linalg::Complex sum{};
    for (int m = 0; m <= n; ++m) {
        const double weight = std::exp(log_binomial(n, m) - n * std::numbers::ln2);
        sum += weight * std::polar(1.0, 2.0 * m * d);
    }
    return std::norm(sum);
}

}  // namespace qdecide::states
