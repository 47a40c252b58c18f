#include "qeq/realize.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qeq {

namespace {

constexpr double kPrTol = 1e-8;
constexpr double kPassiveIdentityTol = 1e-7;
constexpr double kBoundaryEps = 1e-8;

Index svd_rank(const ComplexMatrix& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const double thresh = rel_tol * svd.singularValues()(0);
    Index r = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > thresh) ++r;
    return r;
}

ComplexMatrix controllability_matrix(const ComplexMatrix& F,
                                     const ComplexMatrix& G) {
    const Index n = F.rows();
    ComplexMatrix ctrb(n, n * G.cols());
    ComplexMatrix blk = G;
    for (Index i = 0; i < n; ++i) {
        ctrb.middleCols(i * G.cols(), G.cols()) = blk;
        blk = F * blk;
    }
    return ctrb;
}

// Stabilizing solution of F^dagger X + X F + X G G^dagger X + H^dagger H = 0
// via the stable invariant subspace of [[F, GG^dagger], [-H^dagger H, -F^dagger]].
// Returns false when the Hamiltonian has too few strictly stable eigenvalues
// (the bounded-real boundary) or the subspace has no graph form.
bool bounded_real_riccati(const ComplexMatrix& F, const ComplexMatrix& G,
                          const ComplexMatrix& H, ComplexMatrix& X) {
    const Index n = F.rows();
    ComplexMatrix M(2 * n, 2 * n);
    M << F, G * G.adjoint(), -H.adjoint() * H, -F.adjoint();
    Eigen::ComplexSchur<ComplexMatrix> schur(M, true);
    ComplexMatrix T = schur.matrixT();
    ComplexMatrix U = schur.matrixU();
    if (detail::reorder_schur_stable_first(T, U) != n) return false;
    Eigen::FullPivLU<ComplexMatrix> lu(U.topLeftCorner(n, n));
    if (!lu.isInvertible()) return false;
    X = hermitian_part<Complex>(U.bottomLeftCorner(n, n) * lu.inverse());
    const double res =
        (F.adjoint() * X + X * F + X * G * G.adjoint() * X + H.adjoint() * H)
            .norm();
    return res <= 1e-7 * (1.0 + X.norm() * X.norm());
}

}  // namespace

ActivePrCheck verify_active_pr(const QuadratureSystem& sys,
                               const ChannelPartition& partition) {
    require(partition.n_v >= 0 && partition.n_u >= 0 &&
                partition.n_v % 2 == 0 && partition.n_u % 2 == 0,
            "verify_active_pr: partition sizes must be even and nonnegative");
    require(partition.n_v + partition.n_u == sys.n_w(),
            "verify_active_pr: partition does not match the input count (" +
                std::to_string(partition.n_v) + "+" +
                std::to_string(partition.n_u) + " != " +
                std::to_string(sys.n_w()) + ")");
    require(sys.n_y() <= partition.n_v,
            "verify_active_pr: output dimension exceeds the vacuum channel count");

    const Index n = sys.n();
    const RealMatrix theta = commutation_matrix(n);
    const RealMatrix B_v = sys.B.leftCols(partition.n_v);
    const RealMatrix B_u = sys.B.rightCols(partition.n_u);

    RealMatrix lhs = sys.A * theta + theta * sys.A.transpose();
    if (partition.n_v > 0)
        lhs += B_v * commutation_matrix(partition.n_v) * B_v.transpose();
    if (partition.n_u > 0)
        lhs += B_u * commutation_matrix(partition.n_u) * B_u.transpose();

    const RealMatrix out_residual =
        B_v.leftCols(sys.n_y()) -
        theta * sys.C.transpose() * commutation_matrix(sys.n_y());

    ActivePrCheck chk;
    chk.residual_dynamics = lhs.norm();
    chk.residual_output = out_residual.norm();
    const double tol = kPrTol * (1.0 + sys.A.norm());
    chk.ok = chk.residual_dynamics <= tol && chk.residual_output <= tol;
    return chk;
}

CoherentController<double> complete_active(const ClassicalController<double>& ctrl) {
    const Index n_k = ctrl.A_k.rows();
    const Index n_uhat = ctrl.C_k.rows();
    const Index n_y = ctrl.B_y.cols();
    require(n_k % 2 == 0 && n_uhat % 2 == 0 && n_y % 2 == 0,
            "complete_active: controller dimensions must all be even");
    require(all_finite(ctrl.A_k) && all_finite(ctrl.B_y) && all_finite(ctrl.C_k),
            "complete_active: non-finite controller matrices");

    const RealMatrix theta = commutation_matrix(n_k);

    CoherentController<double> out;
    out.A_k = ctrl.A_k;
    out.B_y = ctrl.B_y;
    out.C_k = ctrl.C_k;
    out.B_v1 = theta * ctrl.C_k.transpose() * commutation_matrix(n_uhat);

    RealMatrix Z = ctrl.A_k * theta + theta * ctrl.A_k.transpose() +
                   out.B_v1 * commutation_matrix(n_uhat) * out.B_v1.transpose();
    if (n_y > 0)
        Z += ctrl.B_y * commutation_matrix(n_y) * ctrl.B_y.transpose();
    out.B_v2 = skew_factor(-Z);

    RealMatrix B(n_k, n_uhat + out.B_v2.cols() + n_y);
    B << out.B_v1, out.B_v2, out.B_y;
    RealMatrix D = RealMatrix::Zero(n_uhat, B.cols());
    D.leftCols(n_uhat).setIdentity();
    const QuadratureSystem augmented(out.A_k, B, out.C_k, D);
    const ActivePrCheck chk = verify_active_pr(
        augmented, ChannelPartition{n_uhat + out.B_v2.cols(), n_y});
    if (!chk.ok)
        throw NumericalError(
            "complete_active: completed controller fails the realizability "
            "identities (residuals " +
            std::to_string(chk.residual_dynamics) + ", " +
            std::to_string(chk.residual_output) + ")");
    return out;
}

PassiveRealizability check_passive_realizable(const ComplexMatrix& F_c,
                                              const ComplexMatrix& G_c,
                                              const ComplexMatrix& H_c) {
    require(F_c.rows() == F_c.cols(), "check_passive_realizable: F_c not square");
    require(G_c.rows() == F_c.rows() && H_c.cols() == F_c.cols(),
            "check_passive_realizable: inconsistent dimensions");

    PassiveRealizability out;
    out.controllable =
        svd_rank(controllability_matrix(F_c, G_c), 1e-9) == F_c.rows();
    out.observable =
        svd_rank(controllability_matrix(ComplexMatrix(F_c.adjoint()),
                                        ComplexMatrix(H_c.adjoint())),
                 1e-9) == F_c.rows();
    out.hurwitz = is_hurwitz(F_c);
    out.hinf = out.hurwitz ? hinf_norm(F_c, G_c, H_c)
                           : std::numeric_limits<double>::infinity();
    out.realizable = out.controllable && out.observable && out.hurwitz &&
                     out.hinf <= 1.0 + 1e-9;
    return out;
}

CoherentController<Complex> complete_passive(const ComplexMatrix& F_c,
                                             const ComplexMatrix& G_c,
                                             const ComplexMatrix& H_c) {
    const PassiveRealizability chk = check_passive_realizable(F_c, G_c, H_c);
    if (!chk.realizable) {
        std::ostringstream os;
        os << "complete_passive: controller is not physically realizable"
           << " (hurwitz=" << chk.hurwitz << ", controllable=" << chk.controllable
           << ", observable=" << chk.observable << ", |T|_inf=" << chk.hinf
           << ")";
        throw SynthesisError(os.str());
    }

    const Index n = F_c.rows();
    ComplexMatrix X;
    if (!bounded_real_riccati(F_c, G_c, H_c, X)) {
        // Norm on the unit boundary: shrink the output coupling slightly so a
        // strictly stabilizing solution exists. The identity residual this
        // leaves behind is of order kBoundaryEps.
        const ComplexMatrix H_reg = std::sqrt(1.0 - kBoundaryEps) * H_c;
        if (!bounded_real_riccati(F_c, G_c, H_reg, X))
            throw NumericalError(
                "complete_passive: bounded-real Riccati equation has no "
                "stabilizing solution even after regularization");
    }

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(X);
    if (es.eigenvalues().minCoeff() <= 1e-12 * (1.0 + X.norm()))
        throw NumericalError(
            "complete_passive: bounded-real Riccati solution is not positive "
            "definite (minimal realization required)");
    const RealVector sq = es.eigenvalues().cwiseSqrt();
    const ComplexMatrix T =
        es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
    const ComplexMatrix T_inv = es.eigenvectors() *
                                sq.cwiseInverse().asDiagonal() *
                                es.eigenvectors().adjoint();

    CoherentController<Complex> out;
    out.state_transform = T;
    out.A_k = T * F_c * T_inv;
    out.B_y = T * G_c;
    out.C_k = H_c * T_inv;
    out.B_v1 = -out.C_k.adjoint();
    out.out_coupling_y = -out.B_y.adjoint();

    // Whatever the commutation identity still misses is a PSD defect that
    // extra vacuum channels can absorb.
    const ComplexMatrix defect = -hermitian_part<Complex>(ComplexMatrix(
        out.A_k + out.A_k.adjoint() + out.B_v1 * out.B_v1.adjoint() +
        out.B_y * out.B_y.adjoint()));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> des(defect);
    const double clip = 1e-9 * (1.0 + defect.norm());
    std::vector<Index> keep;
    for (Index i = 0; i < des.eigenvalues().size(); ++i)
        if (des.eigenvalues()(i) > clip) keep.push_back(i);
    out.B_v2 = ComplexMatrix(n, Index(keep.size()));
    for (Index j = 0; j < Index(keep.size()); ++j)
        out.B_v2.col(j) =
            std::sqrt(des.eigenvalues()(keep[j])) * des.eigenvectors().col(keep[j]);
    out.out_coupling_extra = -out.B_v2.adjoint();

    const double scale = 1.0 + out.A_k.norm();
    const double res_comm =
        (out.A_k + out.A_k.adjoint() + out.B_v1 * out.B_v1.adjoint() +
         out.B_y * out.B_y.adjoint() + out.B_v2 * out.B_v2.adjoint())
            .norm();
    if (res_comm > kPassiveIdentityTol * scale)
        throw NumericalError(
            "complete_passive: commutation identity residual " +
            std::to_string(res_comm) + " exceeds tolerance");

    // The rescaling is a similarity, so the y -> uhat transfer function must
    // be unchanged.
    for (int i = 0; i < 10; ++i) {
        const double w = (i == 0) ? 0.0 : std::pow(10.0, -2.0 + 4.0 * (i / 9.0));
        const ComplexMatrix t0 = frequency_response<Complex>(
            F_c, G_c, H_c, ComplexMatrix::Zero(H_c.rows(), G_c.cols()),
            Complex(0.0, w));
        const ComplexMatrix t1 = frequency_response<Complex>(
            out.A_k, out.B_y, out.C_k,
            ComplexMatrix::Zero(H_c.rows(), G_c.cols()), Complex(0.0, w));
        if ((t0 - t1).norm() > 1e-8 * (1.0 + t0.norm()))
            throw NumericalError(
                "complete_passive: transfer function drifted during completion");
    }
    return out;
}

QuadratureSystem oscillator_realization(const RealMatrix& R,
                                        const ComplexMatrix& Lambda, Index n_y) {
    const Index n = R.rows();
    const Index cap_nw = Lambda.rows();
    require(R.rows() == R.cols() && n % 2 == 0,
            "oscillator_realization: R must be square with even dimension");
    require(Lambda.cols() == n,
            "oscillator_realization: Lambda columns must match the state");
    require(n_y >= 0 && n_y % 2 == 0 && n_y / 2 <= cap_nw,
            "oscillator_realization: invalid output dimension");

    const RealMatrix R_sym = 0.5 * (R + R.transpose());
    const RealMatrix theta = commutation_matrix(n);
    const ComplexMatrix gram = Lambda.adjoint() * Lambda;
    const RealMatrix A = 2.0 * theta * (R_sym + gram.imag());

    // B = 2i Theta [-Lambda^dagger, Lambda^T] Gamma with
    // Gamma = P blockdiag(M), M = (1/2) [[1, i], [1, -i]].
    const Index n_w = 2 * cap_nw;
    ComplexMatrix gamma = ComplexMatrix::Zero(n_w, n_w);
    const Complex half(0.5, 0.0);
    const Complex half_i(0.0, 0.5);
    for (Index j = 0; j < cap_nw; ++j) {
        // Row j of P selects entry 2j, row cap_nw + j selects entry 2j + 1.
        gamma(j, 2 * j) = half;
        gamma(j, 2 * j + 1) = half_i;
        gamma(cap_nw + j, 2 * j) = half;
        gamma(cap_nw + j, 2 * j + 1) = -half_i;
    }
    ComplexMatrix stacked(n, n_w);
    stacked.leftCols(cap_nw) = -Lambda.adjoint();
    stacked.rightCols(cap_nw) = Lambda.transpose();
    const ComplexMatrix B_c =
        Complex(0.0, 2.0) * theta.cast<Complex>() * stacked * gamma;
    const RealMatrix B = realify(B_c, 1e-9 * (1.0 + B_c.norm()),
                                 "oscillator_realization: B");

    RealMatrix C(n_y, n);
    for (Index i = 0; i < n_y / 2; ++i) {
        C.row(2 * i) = 2.0 * Lambda.row(i).real();
        C.row(2 * i + 1) = 2.0 * Lambda.row(i).imag();
    }

    RealMatrix D = RealMatrix::Zero(n_y, n_w);
    D.leftCols(n_y).setIdentity();
    return QuadratureSystem(A, B, C, D);
}

OscillatorParams recover_oscillator(const QuadratureSystem& sys) {
    const ActivePrCheck chk = verify_active_pr(sys, ChannelPartition{sys.n_w(), 0});
    if (!chk.ok)
        throw PreconditionError(
            "recover_oscillator: system fails the realizability identities "
            "(residuals " +
            std::to_string(chk.residual_dynamics) + ", " +
            std::to_string(chk.residual_output) + ")");

    const Index n = sys.n();
    const Index cap_nw = sys.n_w() / 2;
    const Index cap_ny = sys.n_y() / 2;
    const RealMatrix theta = commutation_matrix(n);

    OscillatorParams params;
    const RealMatrix half_inv = -0.5 * theta * sys.A;  // (1/2) Theta^-1 A
    params.R = 0.5 * (half_inv + half_inv.transpose());

    params.Lambda = ComplexMatrix::Zero(cap_nw, n);
    for (Index i = 0; i < cap_ny; ++i)
        params.Lambda.row(i) =
            0.5 * (sys.C.row(2 * i).cast<Complex>() +
                   Complex(0.0, 1.0) * sys.C.row(2 * i + 1).cast<Complex>());

    if (cap_nw > cap_ny) {
        // Channels absent from the output are read back from B by inverting
        // the Gamma packing.
        ComplexMatrix gamma_inv = ComplexMatrix::Zero(2 * cap_nw, 2 * cap_nw);
        for (Index j = 0; j < cap_nw; ++j) {
            gamma_inv(2 * j, j) = Complex(1.0, 0.0);
            gamma_inv(2 * j, cap_nw + j) = Complex(1.0, 0.0);
            gamma_inv(2 * j + 1, j) = Complex(0.0, -1.0);
            gamma_inv(2 * j + 1, cap_nw + j) = Complex(0.0, 1.0);
        }
        const ComplexMatrix W = Complex(0.0, 0.5) * theta.cast<Complex>() *
                                sys.B.cast<Complex>() * gamma_inv;
        const ComplexMatrix from_b = W.rightCols(cap_nw).transpose();
        params.Lambda.bottomRows(cap_nw - cap_ny) =
            from_b.bottomRows(cap_nw - cap_ny);
    }

    const QuadratureSystem recon =
        oscillator_realization(params.R, params.Lambda, sys.n_y());
    const double tol = 1e-8;
    if ((recon.A - sys.A).norm() > tol * (1.0 + sys.A.norm()) ||
        (recon.B - sys.B).norm() > tol * (1.0 + sys.B.norm()) ||
        (recon.C - sys.C).norm() > tol * (1.0 + sys.C.norm()) ||
        (recon.D - sys.D).norm() > tol * (1.0 + sys.D.norm()))
        throw NumericalError(
            "recover_oscillator: reconstruction does not reproduce the system "
            "(not an oscillator in the expected form)");
    return params;
}

}  // namespace qeq
