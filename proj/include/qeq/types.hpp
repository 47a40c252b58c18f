#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qeq {

using Complex = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Error raised when an input violates a documented precondition
// (bad dimensions, non-Hurwitz matrix where stability is required, ...).
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Error raised when a synthesis step cannot produce a valid result
// (unstabilizable plant, realizability violation, ...).
class SynthesisError : public std::runtime_error {
public:
    explicit SynthesisError(const std::string& msg) : std::runtime_error(msg) {}
};

// Error raised when a solver rejects its own answer (residual above the
// documented tolerance) or an algebraic identity fails to hold numerically.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Error raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <typename Derived>
double frob(const Eigen::MatrixBase<Derived>& m) {
    return m.norm();
}

// Hermitian (symmetric in the real case) part of a square matrix.
template <typename Scalar>
Matrix<Scalar> hermitian_part(const Matrix<Scalar>& m) {
    return Scalar(0.5) * (m + m.adjoint()).eval();
}

template <typename Scalar>
Matrix<Scalar> skew_part(const Matrix<Scalar>& m) {
    return Scalar(0.5) * (m - m.adjoint()).eval();
}

inline ComplexMatrix complexify(const RealMatrix& m) {
    return m.cast<Complex>();
}

inline ComplexMatrix complexify(const ComplexMatrix& m) { return m; }

// Real part of a nominally real complex matrix; throws if the imaginary
// residue exceeds `tol` (absolute, entrywise max).
inline RealMatrix realify(const ComplexMatrix& m, double tol,
                          const std::string& context) {
    if (m.size() == 0) return RealMatrix(m.rows(), m.cols());
    const double residue = m.imag().cwiseAbs().maxCoeff();
    if (residue > tol) {
        throw NumericalError(context + ": imaginary residue " +
                             std::to_string(residue) + " exceeds tolerance " +
                             std::to_string(tol));
    }
    return m.real();
}

// Principal square root of a Hermitian PSD matrix. Eigenvalues below
// -tol*scale are rejected; small negatives are clamped to zero.
template <typename Scalar>
Matrix<Scalar> psd_sqrt(const Matrix<Scalar>& m, double tol = 1e-10) {
    if (m.rows() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(hermitian_part<Scalar>(m));
    const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
    RealVector lam = es.eigenvalues();
    for (Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -tol * scale)
            throw PreconditionError("psd_sqrt: matrix is not positive semidefinite");
        lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
    }
    return es.eigenvectors() * lam.asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace qeq
