// Dense complex-matrix kernel with a cyclic-Jacobi Hermitian eigensolver.
// Dimensions here stay small (a few hundred at most), so everything is a
// plain row-major std::vector<std::complex<double>> and the solver favours
// determinism over asymptotic speed.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qdecide::linalg {

using Complex = std::complex<double>;

class ComplexMatrix {
public:
    // Zero matrix of the given dimension.
    explicit ComplexMatrix(std::size_t dim);

    // Takes ownership of row-major entries; rejects size mismatch and
    // non-finite values.
    ComplexMatrix(std::size_t dim, std::vector<Complex> entries);

    static ComplexMatrix identity(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }

    Complex& operator()(std::size_t row, std::size_t col) noexcept {
        return data_[row * dim_ + col];
    }
    const Complex& operator()(std::size_t row, std::size_t col) const noexcept {
        return data_[row * dim_ + col];
    }

    const std::vector<Complex>& data() const noexcept { return data_; }

    ComplexMatrix adjoint() const;

    double max_abs() const;
    double frobenius_norm() const;
    // max |a_ij - conj(a_ji)| over all entries; 0 for exactly Hermitian input.
    double hermiticity_error() const;
    double max_abs_diff(const ComplexMatrix& other) const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex scalar);

    friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) {
        lhs += rhs;
        return lhs;
    }
    friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) {
        lhs -= rhs;
        return lhs;
    }
    friend ComplexMatrix operator*(Complex scalar, ComplexMatrix m) {
        m *= scalar;
        return m;
    }

private:
    std::size_t dim_;
    std::vector<Complex> data_;
};

// Matrix product (naive O(n^3); fine at these sizes).
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

Complex trace(const ComplexMatrix& m);

// result(m, n) = conj(a_m) * b_n, so outer_product(u, u) reproduces a pure
// density matrix from its amplitude vector.
ComplexMatrix outer_product(const std::vector<Complex>& a, const std::vector<Complex>& b);

struct EigenOptions {
    // Sweep until the off-diagonal Frobenius mass drops below
    // convergence * ||m||_F.
    double convergence = 1e-14;
    // Maximum accepted |m - m†| entrywise on input.
    double hermiticity = 1e-12;
    int max_sweeps = 100;
};

struct SpectralDecomposition {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // column k pairs with eigenvalues[k]
};

// Cyclic Jacobi diagonalisation of a Hermitian matrix. Deterministic: a
// fixed sweep order and no data-dependent pivoting, so identical input bits
// give identical output bits. Throws std::invalid_argument (with the
// measured asymmetry) for non-Hermitian input and std::runtime_error (with
// the residual) if the sweep cap is exhausted.
SpectralDecomposition hermitian_eigen(const ComplexMatrix& m, const EigenOptions& opts = {});

}  // namespace qdecide::linalg
