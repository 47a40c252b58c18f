#include "qeq/mateq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

namespace qeq {

namespace {

std::string dim_str(const ComplexMatrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

double max_real_eigenvalue(const ComplexMatrix& A) {
    if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::ComplexEigenSolver<ComplexMatrix> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

// Swaps the adjacent diagonal entries j, j+1 of the upper-triangular T,
// applying the same unitary to U and keeping T triangular.
void swap_schur_entries(ComplexMatrix& T, ComplexMatrix& U, Index j) {
    const Complex a = T(j, j);
    const Complex b = T(j, j + 1);
    const Complex d = T(j + 1, j + 1);
    // [b, d - a] is an eigenvector of [[a, b], [0, d]] for eigenvalue d.
    const double nv = std::sqrt(std::norm(b) + std::norm(d - a));
    if (nv < 1e-300) return;  // coincident eigenvalues, nothing to move
    Eigen::Matrix2cd Q;
    Q << b / nv, -std::conj(d - a) / nv,  //
        (d - a) / nv, std::conj(b) / nv;
    T.middleRows(j, 2) = (Q.adjoint() * T.middleRows(j, 2)).eval();
    T.middleCols(j, 2) = (T.middleCols(j, 2) * Q).eval();
    U.middleCols(j, 2) = (U.middleCols(j, 2) * Q).eval();
    T(j + 1, j) = Complex(0.0, 0.0);
}

void check_square_finite(const ComplexMatrix& A, const char* who) {
    require(A.rows() == A.cols(),
            std::string(who) + ": matrix must be square, got " + dim_str(A));
    require(all_finite(A), std::string(who) + ": non-finite entries");
}

void check_hermitian(const ComplexMatrix& N, const char* who) {
    const double res = (N - N.adjoint()).norm();
    if (res > 1e-8 * (1.0 + N.norm()))
        throw PreconditionError(std::string(who) +
                                ": matrix is not Hermitian (residual " +
                                std::to_string(res) + ")");
}

// Solves T Y + Y T^dagger + N = 0 for upper-triangular T, by columns.
ComplexMatrix solve_triangular_lyapunov(const ComplexMatrix& T,
                                        const ComplexMatrix& N) {
    const Index n = T.rows();
    ComplexMatrix Y = ComplexMatrix::Zero(n, n);
    for (Index k = n - 1; k >= 0; --k) {
        ComplexVector rhs = -N.col(k);
        for (Index j = k + 1; j < n; ++j) rhs -= Y.col(j) * std::conj(T(k, j));
        ComplexMatrix S = T;
        S.diagonal().array() += std::conj(T(k, k));
        Y.col(k) = S.triangularView<Eigen::Upper>().solve(rhs);
    }
    return Y;
}

Solution<Complex> solve_lyapunov_complex(const ComplexMatrix& A,
                                         const ComplexMatrix& N) {
    check_square_finite(A, "solve_lyapunov");
    require(N.rows() == A.rows() && N.cols() == A.cols(),
            "solve_lyapunov: N must conform with A");
    require(all_finite(N), "solve_lyapunov: non-finite entries in N");
    check_hermitian(N, "solve_lyapunov");
    if (!is_hurwitz(A))
        throw PreconditionError(
            "solve_lyapunov: A is not Hurwitz, no unique stable solution "
            "(max Re eigenvalue = " +
            std::to_string(max_real_eigenvalue(A)) + ")");

    const Index n = A.rows();
    Solution<Complex> sol;
    if (n == 0) {
        sol.value = ComplexMatrix(0, 0);
        return sol;
    }

    Eigen::ComplexSchur<ComplexMatrix> schur(A, true);
    const ComplexMatrix& T = schur.matrixT();
    const ComplexMatrix& U = schur.matrixU();
    const ComplexMatrix Y = solve_triangular_lyapunov(T, U.adjoint() * N * U);
    ComplexMatrix X = U * Y * U.adjoint();
    X = hermitian_part<Complex>(X);

    // Separation proxy: the smallest denominator in the triangular solve.
    double sep = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            sep = std::min(sep, std::abs(T(i, i) + std::conj(T(j, j))));

    sol.report.conditioning = sep;
    sol.report.residual_norm =
        (A * X + X * A.adjoint() + N).norm() / (1.0 + X.norm());
    if (sol.report.residual_norm > kLyapunovTol)
        throw NumericalError("solve_lyapunov: residual " +
                             std::to_string(sol.report.residual_norm) +
                             " exceeds tolerance (separation estimate " +
                             std::to_string(sep) + ")");
    sol.value = std::move(X);
    return sol;
}

Solution<Complex> solve_care_complex(const ComplexMatrix& A,
                                     const ComplexMatrix& B,
                                     const ComplexMatrix& Qw,
                                     const ComplexMatrix& Rw) {
    check_square_finite(A, "solve_care");
    const Index n = A.rows();
    require(B.rows() == n, "solve_care: B row count must match A");
    require(all_finite(B), "solve_care: non-finite entries in B");
    require(Qw.rows() == n && Qw.cols() == n, "solve_care: Qw must conform with A");
    check_hermitian(Qw, "solve_care: Qw");
    require(Rw.rows() == B.cols() && Rw.cols() == B.cols(),
            "solve_care: Rw must conform with B");
    check_hermitian(Rw, "solve_care: Rw");
    Eigen::LLT<ComplexMatrix> rw_llt(hermitian_part<Complex>(Rw));
    require(rw_llt.info() == Eigen::Success,
            "solve_care: Rw is not positive definite");

    const ComplexMatrix G = B * rw_llt.solve(B.adjoint());

    ComplexMatrix H(2 * n, 2 * n);
    H << A, -G, -Qw, -A.adjoint();

    Eigen::ComplexSchur<ComplexMatrix> schur(H, true);
    ComplexMatrix T = schur.matrixT();
    ComplexMatrix U = schur.matrixU();
    const Index n_stable = detail::reorder_schur_stable_first(T, U);
    if (n_stable != n)
        throw SynthesisError(
            "solve_care: Hamiltonian matrix has " + std::to_string(n_stable) +
            " strictly stable eigenvalues, expected " + std::to_string(n) +
            "; no stabilizing solution (stabilizability/detectability failure)");

    const ComplexMatrix U11 = U.topLeftCorner(n, n);
    const ComplexMatrix U21 = U.bottomLeftCorner(n, n);
    Eigen::FullPivLU<ComplexMatrix> lu(U11);
    if (!lu.isInvertible())
        throw SynthesisError(
            "solve_care: stable invariant subspace has no graph form; "
            "no stabilizing solution");
    ComplexMatrix P = hermitian_part<Complex>(U21 * lu.inverse());

    Eigen::JacobiSVD<ComplexMatrix> svd(U11);
    const double rcond =
        svd.singularValues()(n - 1) / std::max(svd.singularValues()(0), 1e-300);

    auto residual = [&](const ComplexMatrix& X) {
        const ComplexMatrix K = rw_llt.solve(B.adjoint() * X);
        return ((A.adjoint() * X + X * A - K.adjoint() * Rw * K + Qw).norm() /
                (1.0 + X.norm()));
    };

    // Newton-Kleinman polish; the Schur solution is already close, so this
    // typically runs 0-2 rounds.
    int iters = 0;
    double res = residual(P);
    while (res > 0.1 * kCareTol && iters < 8) {
        const ComplexMatrix K = rw_llt.solve(B.adjoint() * P);
        const ComplexMatrix Acl = A - B * K;
        if (!is_hurwitz(Acl, 0.0)) break;
        const ComplexMatrix N = Qw + K.adjoint() * Rw * K;
        P = hermitian_part<Complex>(
            solve_lyapunov(ComplexMatrix(Acl.adjoint()), hermitian_part<Complex>(N))
                .value);
        const double next = residual(P);
        ++iters;
        if (next >= res) break;
        res = next;
    }

    if (res > kCareTol)
        throw NumericalError("solve_care: residual " + std::to_string(res) +
                             " exceeds tolerance");

    const ComplexMatrix Acl = A - B * rw_llt.solve(B.adjoint() * P);
    if (!is_hurwitz(Acl, 0.0))
        throw SynthesisError(
            "solve_care: closed-loop matrix is not Hurwitz; solution is not "
            "stabilizing");

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(P);
    if (es.eigenvalues().minCoeff() < -1e-7 * (1.0 + P.norm()))
        throw SynthesisError("solve_care: stabilizing solution is not PSD (min "
                             "eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");

    Solution<Complex> sol;
    sol.value = std::move(P);
    sol.report.residual_norm = res;
    sol.report.iterations = iters;
    sol.report.conditioning = rcond;
    return sol;
}

bool has_imag_axis_eigenvalue(const ComplexMatrix& M, double tol) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(M, false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex lam = es.eigenvalues()(i);
        if (std::abs(lam.real()) <= tol * (1.0 + std::abs(lam))) return true;
    }
    return false;
}

double hinf_norm_complex(const ComplexMatrix& F, const ComplexMatrix& G,
                         const ComplexMatrix& H) {
    check_square_finite(F, "hinf_norm");
    const Index n = F.rows();
    require(G.rows() == n, "hinf_norm: G row count must match F");
    require(H.cols() == n, "hinf_norm: H column count must match F");
    require(all_finite(G) && all_finite(H), "hinf_norm: non-finite entries");
    if (n == 0 || G.cols() == 0 || H.rows() == 0) return 0.0;
    if (!is_hurwitz(F))
        throw PreconditionError(
            "hinf_norm: F is not Hurwitz, the norm is undefined (max Re "
            "eigenvalue = " +
            std::to_string(max_real_eigenvalue(F)) + ")");

    // Frequency sweep for the lower bound. Complex systems are not
    // conjugate-symmetric, so both signs of omega are covered, and the
    // eigenfrequencies of F are included to catch sharp resonances.
    Eigen::ComplexEigenSolver<ComplexMatrix> es(F, false);
    double lo_mag = std::numeric_limits<double>::infinity();
    double hi_mag = 0.0;
    std::vector<double> sweep;
    for (Index i = 0; i < n; ++i) {
        const Complex lam = es.eigenvalues()(i);
        lo_mag = std::min(lo_mag, std::max(std::abs(lam), 1e-6));
        hi_mag = std::max(hi_mag, std::abs(lam));
        sweep.push_back(lam.imag());
    }
    const double w_lo = lo_mag / 100.0;
    const double w_hi = std::max(hi_mag * 100.0, w_lo * 10.0);
    const int n_sweep = 200;
    for (int i = 0; i < n_sweep; ++i) {
        const double w =
            w_lo * std::pow(w_hi / w_lo, double(i) / double(n_sweep - 1));
        sweep.push_back(w);
        sweep.push_back(-w);
    }
    sweep.push_back(0.0);

    RealVector omegas =
        Eigen::Map<const RealVector>(sweep.data(), Index(sweep.size()));
    double gamma_lo = gain_sweep_max(F, G, H, omegas);
    if (gamma_lo == 0.0) return 0.0;

    const ComplexMatrix GGt = G * G.adjoint();
    const ComplexMatrix HtH = H.adjoint() * H;
    auto crosses = [&](double gamma) {
        ComplexMatrix M(2 * n, 2 * n);
        M << F, GGt / gamma, -HtH / gamma, -F.adjoint();
        return has_imag_axis_eigenvalue(M, 1e-8);
    };

    double gamma_hi = 2.0 * gamma_lo;
    int guard = 0;
    while (crosses(gamma_hi)) {
        gamma_hi *= 2.0;
        if (++guard > 60)
            throw NumericalError("hinf_norm: failed to bracket the norm");
    }
    // Converge well past the documented tolerance; boundary cases (norm
    // exactly 1) are compared against 1 + 1e-9 downstream.
    const double rel = std::min(kHinfRelTol, 1e-10);
    while ((gamma_hi - gamma_lo) > rel * gamma_lo) {
        const double mid = 0.5 * (gamma_lo + gamma_hi);
        if (crosses(mid))
            gamma_lo = mid;
        else
            gamma_hi = mid;
    }
    return 0.5 * (gamma_lo + gamma_hi);
}

}  // namespace

RealMatrix commutation_matrix(Index m) {
    require(m >= 0 && m % 2 == 0,
            "commutation_matrix: dimension must be even and nonnegative, got " +
                std::to_string(m));
    RealMatrix theta = RealMatrix::Zero(m, m);
    for (Index i = 0; i < m; i += 2) {
        theta(i, i + 1) = 1.0;
        theta(i + 1, i) = -1.0;
    }
    return theta;
}

bool is_hurwitz(const ComplexMatrix& A, double margin) {
    check_square_finite(A, "is_hurwitz");
    if (A.rows() == 0) return true;
    return max_real_eigenvalue(A) < -margin;
}

bool is_hurwitz(const RealMatrix& A, double margin) {
    return is_hurwitz(ComplexMatrix(complexify(A)), margin);
}

Solution<Complex> solve_lyapunov(const ComplexMatrix& A, const ComplexMatrix& N) {
    return solve_lyapunov_complex(A, N);
}

Solution<double> solve_lyapunov(const RealMatrix& A, const RealMatrix& N) {
    Solution<Complex> cs = solve_lyapunov_complex(complexify(A), complexify(N));
    Solution<double> sol;
    sol.report = cs.report;
    sol.value = realify(cs.value, 1e-12 * (1.0 + cs.value.norm()),
                        "solve_lyapunov (real)");
    return sol;
}

Solution<Complex> solve_care(const ComplexMatrix& A, const ComplexMatrix& B,
                             const ComplexMatrix& Qw, const ComplexMatrix& Rw) {
    return solve_care_complex(A, B, Qw, Rw);
}

Solution<double> solve_care(const RealMatrix& A, const RealMatrix& B,
                            const RealMatrix& Qw, const RealMatrix& Rw) {
    Solution<Complex> cs = solve_care_complex(complexify(A), complexify(B),
                                              complexify(Qw), complexify(Rw));
    Solution<double> sol;
    sol.report = cs.report;
    sol.value =
        realify(cs.value, 1e-10 * (1.0 + cs.value.norm()), "solve_care (real)");
    return sol;
}

double gain_sweep_max(const ComplexMatrix& F, const ComplexMatrix& G,
                      const ComplexMatrix& H, const RealVector& omegas) {
    double best = 0.0;
    for (Index i = 0; i < omegas.size(); ++i) {
        ComplexMatrix S = -F;
        S.diagonal().array() += Complex(0.0, omegas(i));
        const ComplexMatrix T = H * S.fullPivLu().solve(G);
        Eigen::JacobiSVD<ComplexMatrix> svd(T);
        best = std::max(best, svd.singularValues()(0));
    }
    return best;
}

double hinf_norm(const ComplexMatrix& F, const ComplexMatrix& G,
                 const ComplexMatrix& H) {
    return hinf_norm_complex(F, G, H);
}

double hinf_norm(const RealMatrix& F, const RealMatrix& G, const RealMatrix& H) {
    return hinf_norm_complex(complexify(F), complexify(G), complexify(H));
}

RealMatrix skew_factor(const RealMatrix& Z) {
    require(Z.rows() == Z.cols(), "skew_factor: Z must be square");
    require(all_finite(Z), "skew_factor: non-finite entries");
    const Index m = Z.rows();
    const double scale = 1.0 + Z.norm();
    if ((Z + Z.transpose()).norm() > 1e-10 * scale)
        throw PreconditionError("skew_factor: Z is not skew-symmetric (residual " +
                                std::to_string((Z + Z.transpose()).norm()) + ")");
    const RealMatrix Zs = 0.5 * (Z - Z.transpose());

    RealMatrix Q = RealMatrix::Identity(m, m);
    RealMatrix T = Zs;
    if (m > 1 && Zs.norm() > 0.0) {
        Eigen::RealSchur<RealMatrix> schur(Zs);
        Q = schur.matrixU();
        // Q^T Z Q is skew and quasi-triangular, hence block diagonal with
        // 2x2 blocks [[0, b], [-b, 0]]; symmetrize away roundoff.
        T = 0.5 * (schur.matrixT() - schur.matrixT().transpose());
    }

    const double drop_tol = 1e-10 * scale;
    std::vector<RealMatrix> cols;
    Index rank2 = 0;
    for (Index i = 0; i + 1 < m;) {
        const double b = T(i, i + 1);
        if (std::abs(b) <= drop_tol) {
            ++i;
            continue;
        }
        const double s = std::sqrt(std::abs(b));
        RealMatrix f2(2, 2);
        if (b > 0.0)
            f2 << s, 0.0, 0.0, s;  // +sJ block
        else
            f2 << 0.0, s, s, 0.0;  // -sJ block
        cols.push_back(Q.middleCols(i, 2) * f2);
        rank2 += 2;
        i += 2;
    }

    RealMatrix B(m, rank2);
    Index at = 0;
    for (const RealMatrix& c : cols) {
        B.middleCols(at, 2) = c;
        at += 2;
    }

    const RealMatrix recon = B * commutation_matrix(rank2) * B.transpose();
    if ((recon - Z).norm() > kSkewFactorTol)
        throw NumericalError("skew_factor: reconstruction residual " +
                             std::to_string((recon - Z).norm()) +
                             " exceeds tolerance");
    return B;
}

namespace detail {

Index reorder_schur_stable_first(ComplexMatrix& T, ComplexMatrix& U) {
    const Index n = T.rows();
    Index front = 0;
    for (Index k = 0; k < n; ++k) {
        if (T(k, k).real() < 0.0) {
            for (Index j = k; j > front; --j) swap_schur_entries(T, U, j - 1);
            ++front;
        }
    }
    return front;
}

}  // namespace detail

}  // namespace qeq
