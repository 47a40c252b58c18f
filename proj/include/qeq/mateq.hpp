#pragma once

// Dense matrix-equation solvers used throughout the synthesis pipeline:
// stability tests, Lyapunov and algebraic Riccati equations (real-symmetric
// and complex-Hermitian), H-infinity norm, and the skew-symmetric
// factorization used by the vacuum-noise completion.

#include "qeq/types.hpp"

namespace qeq {

// Default tolerances. Each solver re-substitutes its answer and rejects it
// (NumericalError) when the stated bound is violated.
inline constexpr double kHurwitzMargin = 1e-9;
inline constexpr double kLyapunovTol = 1e-10;
inline constexpr double kCareTol = 1e-9;
inline constexpr double kHinfRelTol = 1e-6;
inline constexpr double kSkewFactorTol = 1e-9;

struct SolveReport {
    double residual_norm = 0.0;  // relative residual of the re-substituted answer
    int iterations = 0;          // refinement steps (0 when direct)
    double conditioning = 0.0;   // problem-dependent conditioning estimate
};

template <typename Scalar>
struct Solution {
    Matrix<Scalar> value;
    SolveReport report;
};

// Canonical commutation matrix Theta_m = blockdiag(J, ..., J) with
// J = [[0, 1], [-1, 0]]; m must be even and nonnegative.
RealMatrix commutation_matrix(Index m);

// True iff all eigenvalues of A satisfy Re(lambda) < -margin.
bool is_hurwitz(const RealMatrix& A, double margin = kHurwitzMargin);
bool is_hurwitz(const ComplexMatrix& A, double margin = kHurwitzMargin);

// Solves A X + X A* + N = 0 for Hurwitz A and Hermitian N
// (Bartels-Stewart on the Schur form). The adjoint * is the transpose in the
// real overload and the conjugate transpose in the complex one.
Solution<Complex> solve_lyapunov(const ComplexMatrix& A, const ComplexMatrix& N);
Solution<double> solve_lyapunov(const RealMatrix& A, const RealMatrix& N);

// Stabilizing solution of A*P + P A - P B Rw^-1 B* P + Qw = 0.
// P is Hermitian PSD and A - B Rw^-1 B* P is Hurwitz; computed from the
// stable invariant subspace of the Hamiltonian matrix, then polished by
// Newton-Kleinman steps until the residual bound holds.
Solution<Complex> solve_care(const ComplexMatrix& A, const ComplexMatrix& B,
                             const ComplexMatrix& Qw, const ComplexMatrix& Rw);
Solution<double> solve_care(const RealMatrix& A, const RealMatrix& B,
                            const RealMatrix& Qw, const RealMatrix& Rw);

// ||H (sI - F)^-1 G||_inf for Hurwitz F, to relative tolerance kHinfRelTol.
// Bisection on gamma with the imaginary-axis eigenvalue test of the
// associated Hamiltonian matrix; a frequency sweep initializes the bracket.
double hinf_norm(const ComplexMatrix& F, const ComplexMatrix& G,
                 const ComplexMatrix& H);
double hinf_norm(const RealMatrix& F, const RealMatrix& G, const RealMatrix& H);

// Largest singular value of H (i*omega*I - F)^-1 G on the given frequencies.
// Exposed for use as an independent lower-bound oracle.
double gain_sweep_max(const ComplexMatrix& F, const ComplexMatrix& G,
                      const ComplexMatrix& H, const RealVector& omegas);

// Factors a real skew-symmetric Z as B Theta_{2r} B^T with 2r = rank(Z),
// via the real canonical form Z = Q blockdiag(s_i J, 0) Q^T. A +sJ block
// takes the factor sqrt(s) I_2, a -sJ block the permuted sqrt(s) [[0,1],[1,0]].
RealMatrix skew_factor(const RealMatrix& Z);

namespace detail {

// Reorders a complex Schur form (T upper triangular, U unitary) so entries
// with Re(T(k,k)) < 0 come first; returns how many were moved to the front.
Index reorder_schur_stable_first(ComplexMatrix& T, ComplexMatrix& U);

}  // namespace detail

}  // namespace qeq
