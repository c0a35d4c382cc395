#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstring>
#include <random>
#include <vector>

#include "qdecide/complex_matrix.hpp"

using qdecide::linalg::Complex;
using qdecide::linalg::ComplexMatrix;
using qdecide::linalg::EigenOptions;
using qdecide::linalg::hermitian_eigen;
using qdecide::linalg::matmul;
using qdecide::linalg::outer_product;
using qdecide::linalg::SpectralDecomposition;

namespace {

ComplexMatrix random_hermitian(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m(i, i) = Complex(uni(rng), 0.0);
        for (std::size_t j = i + 1; j < dim; ++j) {
            const Complex z(uni(rng), uni(rng));
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    }
    return m;
}

std::vector<Complex> random_unit_vector(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Complex> v(dim);
    double norm_sq = 0.0;
    for (auto& z : v) {
        z = Complex(uni(rng), uni(rng));
        norm_sq += std::norm(z);
    }
    for (auto& z : v) {
        z /= std::sqrt(norm_sq);
    }
    return v;
}

// Reconstruction oracle: rebuild V diag(lambda) V^dagger and compare.
double reconstruction_residual(const ComplexMatrix& m, const SpectralDecomposition& eig) {
    const std::size_t n = m.dim();
    ComplexMatrix rebuilt(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Complex sum{};
            for (std::size_t k = 0; k < n; ++k) {
                sum += eig.eigenvectors(i, k) * eig.eigenvalues[k] *
                       std::conj(eig.eigenvectors(j, k));
            }
            rebuilt(i, j) = sum;
        }
    }
    return rebuilt.max_abs_diff(m);
}

double orthonormality_error(const SpectralDecomposition& eig) {
    const ComplexMatrix gram = matmul(eig.eigenvectors.adjoint(), eig.eigenvectors);
    return gram.max_abs_diff(ComplexMatrix::identity(gram.dim()));
}

}  // namespace

TEST_CASE("identity eigenvalues are all one") {
    const auto eig = hermitian_eigen(ComplexMatrix::identity(3));
    REQUIRE(eig.eigenvalues.size() == 3);
    for (double v : eig.eigenvalues) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("pauli-x eigenvalues are minus one and plus one") {
    ComplexMatrix m(2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    const auto eig = hermitian_eigen(m);
    CHECK(eig.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("seeded random hermitian dim 8 reconstructs below 1e-10") {
    const ComplexMatrix m = random_hermitian(8, 20250810);
    const auto eig = hermitian_eigen(m);
    CHECK(reconstruction_residual(m, eig) < 1e-10);
    CHECK(orthonormality_error(eig) < 1e-12);
}

TEST_CASE("eigenvalues come out ascending and sum to the trace") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        for (std::size_t dim : {2u, 3u, 5u, 9u, 16u}) {
            const ComplexMatrix m = random_hermitian(dim, seed * 100 + dim);
            const auto eig = hermitian_eigen(m);
            double sum = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                sum += eig.eigenvalues[k];
                if (k > 0) {
                    CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k - 1]);
                }
            }
            CHECK(std::abs(sum - qdecide::linalg::trace(m).real()) <= 1e-10);
            CHECK(reconstruction_residual(m, eig) <= 1e-10 * dim * m.max_abs() + 1e-13);
        }
    }
}

TEST_CASE("solver is deterministic bit for bit") {
    const ComplexMatrix m = random_hermitian(7, 777);
    const auto a = hermitian_eigen(m);
    const auto b = hermitian_eigen(m);
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    CHECK(std::memcmp(a.eigenvalues.data(), b.eigenvalues.data(),
                      a.eigenvalues.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.eigenvectors.data().data(), b.eigenvectors.data().data(),
                      a.eigenvectors.data().size() * sizeof(Complex)) == 0);
}

TEST_CASE("rank-one outer products stay PSD to the tolerance") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        const auto u = random_unit_vector(6, seed);
        const auto eig = hermitian_eigen(outer_product(u, u));
        CHECK(eig.eigenvalues.front() >= -1e-12);
        CHECK(eig.eigenvalues.back() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("non-hermitian input is rejected with the measured asymmetry") {
    ComplexMatrix m(2);
    m(0, 1) = Complex(0.5, 0.0);
    m(1, 0) = Complex(0.25, 0.0);
    CHECK_THROWS_WITH_AS(hermitian_eigen(m), doctest::Contains("asymmetry"),
                         std::invalid_argument);
}

TEST_CASE("trace of the identity and of unnormalised matrices") {
    CHECK(qdecide::linalg::trace(ComplexMatrix::identity(4)).real() == doctest::Approx(4.0));
    ComplexMatrix m(2);
    m(0, 0) = Complex(1.0, 2.0);
    m(1, 1) = Complex(-0.5, 0.25);
    const Complex t = qdecide::linalg::trace(m);
    CHECK(t.real() == doctest::Approx(0.5));
    CHECK(t.imag() == doctest::Approx(2.25));
}

TEST_CASE("outer product conventions") {
    SUBCASE("basis vector gives a one-hot matrix") {
        const std::vector<Complex> e0{1.0, 0.0};
        const ComplexMatrix m = outer_product(e0, e0);
        CHECK(m(0, 0).real() == doctest::Approx(1.0));
        CHECK(std::abs(m(0, 1)) == doctest::Approx(0.0));
        CHECK(std::abs(m(1, 1)) == doctest::Approx(0.0));
    }
    SUBCASE("unit vectors give unit trace") {
        const auto u = random_unit_vector(5, 99);
        CHECK(qdecide::linalg::trace(outer_product(u, u)).real() == doctest::Approx(1.0));
    }
    SUBCASE("orthogonal vectors give zero trace") {
        const std::vector<Complex> a{1.0, 0.0};
        const std::vector<Complex> b{0.0, 1.0};
        CHECK(std::abs(qdecide::linalg::trace(outer_product(a, b))) == doctest::Approx(0.0));
    }
    SUBCASE("entry convention is conj(a_m) * b_n") {
        const std::vector<Complex> a{Complex(0.0, 1.0), Complex(1.0, 0.0)};
        const std::vector<Complex> b{Complex(2.0, 0.0), Complex(0.0, 0.0)};
        const ComplexMatrix m = outer_product(a, b);
        CHECK(m(0, 0) == Complex(0.0, -2.0));
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(outer_product({Complex(1.0)}, {Complex(1.0), Complex(0.0)}),
                        std::invalid_argument);
    }
}

TEST_CASE("construction rejects non-finite entries") {
    std::vector<Complex> bad{Complex(1.0), Complex(std::nan("")), Complex(0.0), Complex(1.0)};
    CHECK_THROWS_AS(ComplexMatrix(2, std::move(bad)), std::invalid_argument);
}

TEST_CASE("convergence cap raises with the residual attached") {
    const ComplexMatrix m = random_hermitian(12, 4242);
    EigenOptions opts;
    opts.max_sweeps = 0;
    CHECK_THROWS_WITH_AS(hermitian_eigen(m, opts), doctest::Contains("residual"),
                         std::runtime_error);
}
