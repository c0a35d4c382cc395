#include "qdecide/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qdecide::linalg {

namespace {

void check_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.dim() != b.dim()) {
        std::ostringstream msg;
        msg << op << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {
    if (dim == 0) {
        throw std::invalid_argument("ComplexMatrix: dimension must be positive");
    }
}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), data_(std::move(entries)) {
    if (dim == 0) {
        throw std::invalid_argument("ComplexMatrix: dimension must be positive");
    }
    if (data_.size() != dim * dim) {
        std::ostringstream msg;
        msg << "ComplexMatrix: expected " << dim * dim << " entries, got " << data_.size();
        throw std::invalid_argument(msg.str());
    }
    for (const Complex& z : data_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw std::invalid_argument("ComplexMatrix: entries must be finite");
        }
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m(i, i) = Complex(1.0, 0.0);
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            out(j, i) = std::conj((*this)(i, j));
        }
    }
    return out;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const Complex& z : data_) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const Complex& z : data_) {
        s += std::norm(z);
    }
    return std::sqrt(s);
}

double ComplexMatrix::hermiticity_error() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = i; j < dim_; ++j) {
            m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        }
    }
    return m;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& other) const {
    check_same_dim(*this, other, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k) {
        m = std::max(m, std::abs(data_[k] - other.data_[k]));
    }
    return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    check_same_dim(*this, other, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    check_same_dim(*this, other, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= other.data_[k];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
    for (Complex& z : data_) {
        z *= scalar;
    }
    return *this;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_same_dim(a, b, "matmul");
    const std::size_t n = a.dim();
    ComplexMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Complex trace(const ComplexMatrix& m) {
    Complex t{};
    for (std::size_t i = 0; i < m.dim(); ++i) {
        t += m(i, i);
    }
    return t;
}

ComplexMatrix outer_product(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << "outer_product: length mismatch (" << a.size() << " vs " << b.size() << ")";
        throw std::invalid_argument(msg.str());
    }
    ComplexMatrix out(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) {
        for (std::size_t n = 0; n < b.size(); ++n) {
            out(m, n) = std::conj(a[m]) * b[n];
        }
    }
    return out;
}

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    const std::size_t n = a.dim();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                s += std::norm(a(i, j));
            }
        }
    }
    return std::sqrt(s);
}

}  // namespace

SpectralDecomposition hermitian_eigen(const ComplexMatrix& m, const EigenOptions& opts) {
    const double asym = m.hermiticity_error();
    if (asym > opts.hermiticity) {
        std::ostringstream msg;
        msg << "hermitian_eigen: matrix is not Hermitian (asymmetry " << asym
            << " exceeds tolerance " << opts.hermiticity << ")";
        throw std::invalid_argument(msg.str());
    }

    const std::size_t n = m.dim();
    ComplexMatrix a = m;
    // Symmetrise away the sub-tolerance asymmetry so rotations preserve
    // exact Hermiticity.
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = Complex(a(i, i).real(), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }

    ComplexMatrix v = ComplexMatrix::identity(n);
    const double threshold = opts.convergence * m.frobenius_norm();

    double off = off_diagonal_norm(a);
    int sweeps = 0;
    while (off > threshold) {
        if (sweeps >= opts.max_sweeps) {
            std::ostringstream msg;
            msg << "hermitian_eigen: no convergence after " << opts.max_sweeps
                << " sweeps (off-diagonal residual " << off << ", threshold " << threshold
                << ")";
            throw std::runtime_error(msg.str());
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r == 0.0) {
                    continue;
                }
                // Unit phase of the pivot, then a real Jacobi angle with
                // |theta| <= pi/4.
                const Complex phase = a(p, q) / r;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                a(p, p) = Complex(c * c * app - 2.0 * c * s * r + s * s * aqq, 0.0);
                a(q, q) = Complex(s * s * app + 2.0 * c * s * r + c * c * aqq, 0.0);
                a(p, q) = Complex(0.0, 0.0);
                a(q, p) = Complex(0.0, 0.0);

                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) {
                        continue;
                    }
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = c * akp - s * std::conj(phase) * akq;
                    a(k, q) = s * phase * akp + c * akq;
                    a(p, k) = std::conj(a(k, p));
                    a(q, k) = std::conj(a(k, q));
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = c * vkp - s * std::conj(phase) * vkq;
                    v(k, q) = s * phase * vkp + c * vkq;
                }
            }
        }
        ++sweeps;
        off = off_diagonal_norm(a);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&a](std::size_t i, std::size_t j) {
        return a(i, i).real() < a(j, j).real();
    });

    SpectralDecomposition out{std::vector<double>(n), ComplexMatrix(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t row = 0; row < n; ++row) {
            out.eigenvectors(row, k) = v(row, order[k]);
        }
    }
    return out;
}

}  // namespace qdecide::linalg
