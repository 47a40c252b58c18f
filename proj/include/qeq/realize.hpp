#pragma once

// Physical realizability of linear quantum systems: verification of the
// quadrature-domain identities and the passive bounded-real condition,
// vacuum-noise completion of a classical LQG controller into a coherent
// quantum controller, and recovery of the Hamiltonian and coupling
// parameters of the underlying open oscillator.

#include "qeq/lqg.hpp"
#include "qeq/model.hpp"

namespace qeq {

// A classical controller augmented with vacuum noise ports so that it can be
// implemented as a quantum system. The control path (A_k, B_y, C_k) is never
// altered: the output becomes d(uhat) = C_k x_k dt + dv1 and B_v1, B_v2 only
// inject noise. The passive completion additionally records the output
// couplings of the augmented channels and the state transform it applied.
template <typename Scalar>
struct CoherentController {
    Matrix<Scalar> A_k, B_y, C_k;
    Matrix<Scalar> B_v1;  // vacuum channel feeding the output
    Matrix<Scalar> B_v2;  // additional vacuum channels

    Matrix<Scalar> out_coupling_y;      // passive path: H_c2 = -B_y'^dagger
    Matrix<Scalar> out_coupling_extra;  // passive path: rows for B_v2 channels
    Matrix<Scalar> state_transform;     // passive path: T with xi' = T xi

    Index n() const { return A_k.rows(); }
    Index n_v1() const { return B_v1.cols(); }
    Index n_v2() const { return B_v2.cols(); }
};

// Hamiltonian matrix R and coupling matrix Lambda of an open quantum
// harmonic oscillator: H = (1/2) x^T R x, L = Lambda x.
struct OscillatorParams {
    RealMatrix R;
    ComplexMatrix Lambda;
};

// Column partition of a quadrature system's input matrix B = [B_v | B_u]
// into n_v vacuum channels and n_u signal channels.
struct ChannelPartition {
    Index n_v = 0;
    Index n_u = 0;
};

struct ActivePrCheck {
    bool ok = false;
    double residual_dynamics = 0.0;  // A Theta + Theta A^T + B_v Theta B_v^T + B_u Theta B_u^T
    double residual_output = 0.0;    // B_v [I; 0] - Theta C^T Theta_ny
};

struct PassiveRealizability {
    bool realizable = false;
    bool hurwitz = false;
    bool controllable = false;
    bool observable = false;
    double hinf = 0.0;  // attained H-infinity norm (inf when not Hurwitz)
};

// Checks the two physical-realizability identities for an active system with
// output d y = C x dt + d v(first n_y components).
ActivePrCheck verify_active_pr(const QuadratureSystem& sys,
                               const ChannelPartition& partition);

// Vacuum-noise completion of an active classical controller:
//   B_v1 = Theta C_k^T Theta_{n_uhat},
//   B_v2 = skew_factor(-(A_k Theta + Theta A_k^T + B_y Theta B_y^T
//                         + B_v1 Theta B_v1^T)).
// The result passes verify_active_pr.
CoherentController<double> complete_active(const ClassicalController<double>& ctrl);

// Bounded-real test for a passive controller: minimal, Hurwitz, and
// ||H_c (sI - F_c)^-1 G_c||_inf <= 1.
PassiveRealizability check_passive_realizable(const ComplexMatrix& F_c,
                                              const ComplexMatrix& G_c,
                                              const ComplexMatrix& H_c);

// Passive vacuum-noise completion. Finds X > 0 from the bounded-real Riccati
// equation F^dagger X + X F + X G G^dagger X + H^dagger H = 0 (regularized
// when the norm sits on the unit boundary), rescales the state by X^(1/2),
// and sets the noise port couplings so that the augmented system satisfies
//   F + F^dagger + G_tot G_tot^dagger = 0   and   G_tot = -H_tot^dagger.
// The y -> uhat transfer function is preserved exactly.
CoherentController<Complex> complete_passive(const ComplexMatrix& F_c,
                                             const ComplexMatrix& G_c,
                                             const ComplexMatrix& H_c);

// Forward map from oscillator parameters (R, Lambda) to the quadrature
// state-space model with n_y observed output quadratures.
QuadratureSystem oscillator_realization(const RealMatrix& R,
                                        const ComplexMatrix& Lambda, Index n_y);

// Inverse of oscillator_realization for physically realizable systems:
// R from the symmetric part of (1/2) Theta^-1 A, Lambda from the interleaved
// rows of C (and from B for channels that do not appear in the output).
OscillatorParams recover_oscillator(const QuadratureSystem& sys);

}  // namespace qeq
