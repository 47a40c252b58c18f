#pragma once

// State-space representations of passive (annihilation-operator) and active
// (quadrature) linear quantum systems, the conversion between them, and the
// channel + low-pass-filter composition that produces the equalizer plant.

#include "qeq/mateq.hpp"
#include "qeq/types.hpp"

namespace qeq {

enum class Mode { kPassive, kActive };

inline const char* to_string(Mode m) {
    return m == Mode::kPassive ? "passive" : "active";
}

// Canonical commutation matrix Theta = blockdiag(J, ..., J), J = [[0,1],[-1,0]],
// encoding [x_j, x_k] = 2i Theta_jk for quadrature variables.
class CommutationMatrix {
public:
    explicit CommutationMatrix(Index m) : theta_(commutation_matrix(m)) {
        require(m > 0, "CommutationMatrix: dimension must be positive");
    }

    Index dim() const { return theta_.rows(); }
    const RealMatrix& matrix() const { return theta_; }

private:
    RealMatrix theta_;
};

// Passive linear quantum system in annihilation operators:
//   da = F a dt + G dw,  dy = H a dt + J dw.
struct AnnihilationSystem {
    ComplexMatrix F, G, H, J;

    AnnihilationSystem() = default;
    AnnihilationSystem(ComplexMatrix f, ComplexMatrix g, ComplexMatrix h,
                       ComplexMatrix j)
        : F(std::move(f)), G(std::move(g)), H(std::move(h)), J(std::move(j)) {
        require(F.rows() == F.cols(), "AnnihilationSystem: F must be square");
        require(F.rows() >= 1, "AnnihilationSystem: need at least one mode");
        require(G.rows() == F.rows(), "AnnihilationSystem: G rows must match F");
        require(H.cols() == F.cols(), "AnnihilationSystem: H cols must match F");
        require(J.rows() == H.rows() && J.cols() == G.cols(),
                "AnnihilationSystem: J must be n_y x n_w");
    }

    Index n() const { return F.rows(); }
    Index n_w() const { return G.cols(); }
    Index n_y() const { return H.rows(); }
};

// Active linear quantum system in position/momentum quadratures:
//   dx = A x dt + B dw,  dy = C x dt + D dw,  all matrices real,
//   all dimensions even (each mode contributes a position/momentum pair).
struct QuadratureSystem {
    RealMatrix A, B, C, D;

    QuadratureSystem() = default;
    QuadratureSystem(RealMatrix a, RealMatrix b, RealMatrix c, RealMatrix d)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        require(A.rows() == A.cols(), "QuadratureSystem: A must be square");
        require(B.rows() == A.rows(), "QuadratureSystem: B rows must match A");
        require(C.cols() == A.cols(), "QuadratureSystem: C cols must match A");
        require(D.rows() == C.rows() && D.cols() == B.cols(),
                "QuadratureSystem: D must be n_y x n_w");
        require(A.rows() % 2 == 0 && B.cols() % 2 == 0 && C.rows() % 2 == 0,
                "QuadratureSystem: all dimensions must be even");
    }

    Index n() const { return A.rows(); }
    Index n_w() const { return B.cols(); }
    Index n_y() const { return C.rows(); }
};

// Low-pass weighting filter: dx_f = -(1/tau) x_f dt + (1/tau) d(uhat) - (1/tau) du,
// e_bar = x_f. It band-limits the estimation error uhat - u so that the
// quadratic cost is finite.
struct LowPassFilter {
    double tau = 1.0;
    Index width = 1;  // dimension of the signal it filters

    LowPassFilter() = default;
    LowPassFilter(double tau_, Index width_) : tau(tau_), width(width_) {
        require(tau > 0.0, "LowPassFilter: tau must be positive");
        require(width >= 1, "LowPassFilter: width must be at least 1");
    }

    template <typename Scalar>
    Matrix<Scalar> drift() const {
        return Matrix<Scalar>(-(1.0 / tau) *
                              RealMatrix::Identity(width, width).cast<Scalar>());
    }
};

// Quantum channel with inputs partitioned into the signal u and the
// exogenous noise w:
//   dx = A x dt + B_u du + B_w dw,  dy = C x dt + D_u du + D_w dw.
template <typename Scalar>
struct Channel {
    Matrix<Scalar> A, B_u, B_w, C, D_u, D_w;

    Channel() = default;
    Channel(Matrix<Scalar> a, Matrix<Scalar> bu, Matrix<Scalar> bw,
            Matrix<Scalar> c, Matrix<Scalar> du, Matrix<Scalar> dw)
        : A(std::move(a)),
          B_u(std::move(bu)),
          B_w(std::move(bw)),
          C(std::move(c)),
          D_u(std::move(du)),
          D_w(std::move(dw)) {
        require(A.rows() == A.cols(), "Channel: A must be square");
        require(B_u.rows() == A.rows() && B_w.rows() == A.rows(),
                "Channel: input matrices must match the state dimension");
        require(C.cols() == A.cols(), "Channel: C cols must match A");
        require(D_u.rows() == C.rows() && D_u.cols() == B_u.cols(),
                "Channel: D_u must be n_y x n_u");
        require(D_w.rows() == C.rows() && D_w.cols() == B_w.cols(),
                "Channel: D_w must be n_y x n_w");
    }

    Index n() const { return A.rows(); }
    Index n_u() const { return B_u.cols(); }
    Index n_w() const { return B_w.cols(); }
    Index n_y() const { return C.rows(); }
};

// Partitioned equalizer plant
//   dx = A x dt + B_uhat d(uhat) + B_w1 dw1,   dy = C x dt + D_w1 dw1,
// with w1 ordered [u; w] and the performance output e_bar read from the
// state through perf_selector.
template <typename Scalar>
struct EqualizerPlant {
    Matrix<Scalar> A, B_uhat, B_w1, C, D_w1, D_uhat, perf_selector;

    EqualizerPlant() = default;
    EqualizerPlant(Matrix<Scalar> a, Matrix<Scalar> buhat, Matrix<Scalar> bw1,
                   Matrix<Scalar> c, Matrix<Scalar> dw1, Matrix<Scalar> duhat,
                   Matrix<Scalar> selector)
        : A(std::move(a)),
          B_uhat(std::move(buhat)),
          B_w1(std::move(bw1)),
          C(std::move(c)),
          D_w1(std::move(dw1)),
          D_uhat(std::move(duhat)),
          perf_selector(std::move(selector)) {
        require(A.rows() == A.cols(), "EqualizerPlant: A must be square");
        require(B_uhat.rows() == A.rows() && B_w1.rows() == A.rows(),
                "EqualizerPlant: input matrices must match the state dimension");
        require(C.cols() == A.cols(), "EqualizerPlant: C cols must match A");
        require(D_w1.rows() == C.rows() && D_w1.cols() == B_w1.cols(),
                "EqualizerPlant: D_w1 must be n_y x n_w1");
        require(D_uhat.rows() == C.rows() && D_uhat.cols() == B_uhat.cols(),
                "EqualizerPlant: D_uhat must be n_y x n_uhat");
        require(perf_selector.cols() == A.cols(),
                "EqualizerPlant: perf_selector cols must match the state");
        Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(perf_selector);
        require(qr.rank() == perf_selector.rows(),
                "EqualizerPlant: perf_selector must have full row rank");
    }

    Index n() const { return A.rows(); }
    Index n_uhat() const { return B_uhat.cols(); }
    Index n_w1() const { return B_w1.cols(); }
    Index n_y() const { return C.rows(); }
    Index n_perf() const { return perf_selector.rows(); }
};

// 2k x 2k conversion matrix between stacked annihilation/creation pairs and
// interleaved position/momentum quadratures; satisfies Phi Phi^dagger = 2I.
ComplexMatrix quadrature_conversion(Index k);

// Real image of a complex matrix under the annihilation -> quadrature map:
//   M (p x q)  ->  Phi_p blockdiag(M, conj(M)) Phi_q^-1  (2p x 2q).
// Throws NumericalError if the imaginary residue exceeds 1e-12.
RealMatrix quadrature_image(const ComplexMatrix& M);

QuadratureSystem to_quadrature(const AnnihilationSystem& sys);
Channel<double> to_quadrature(const Channel<Complex>& ch);

// Series composition: the output of `first` drives the input of `second`.
AnnihilationSystem series_connect(const AnnihilationSystem& second,
                                  const AnnihilationSystem& first);
QuadratureSystem series_connect(const QuadratureSystem& second,
                                const QuadratureSystem& first);

// Frequency response C (sI - A)^-1 B + D.
template <typename Scalar>
ComplexMatrix frequency_response(const Matrix<Scalar>& A, const Matrix<Scalar>& B,
                                 const Matrix<Scalar>& C, const Matrix<Scalar>& D,
                                 Complex s) {
    ComplexMatrix S = -complexify(Matrix<Scalar>(A));
    S.diagonal().array() += s;
    return complexify(Matrix<Scalar>(C)) * S.fullPivLu().solve(complexify(Matrix<Scalar>(B))) +
           complexify(Matrix<Scalar>(D));
}

// Stacks the channel with the low-pass weighting filter. The filter receives
// the estimate uhat and the channel's signal input u; the plant output is the
// channel output; e_bar is the filter state.
template <typename Scalar>
EqualizerPlant<Scalar> compose_equalizer_plant(const Channel<Scalar>& ch,
                                               const LowPassFilter& filter) {
    require(ch.n_u() == filter.width,
            "compose_equalizer_plant: channel signal width " +
                std::to_string(ch.n_u()) + " does not match filter width " +
                std::to_string(filter.width));
    const Index nc = ch.n();
    const Index nf = filter.width;
    const Index nu = ch.n_u();
    const Index nw = ch.n_w();
    const Scalar g = Scalar(1.0 / filter.tau);
    using M = Matrix<Scalar>;
    const M If = M::Identity(nf, nf);

    M A = M::Zero(nc + nf, nc + nf);
    A.topLeftCorner(nc, nc) = ch.A;
    A.bottomRightCorner(nf, nf) = -g * If;

    M B_uhat = M::Zero(nc + nf, nu);
    B_uhat.bottomRows(nf) = g * If;

    M B_w1 = M::Zero(nc + nf, nu + nw);
    B_w1.topLeftCorner(nc, nu) = ch.B_u;
    B_w1.topRightCorner(nc, nw) = ch.B_w;
    B_w1.bottomLeftCorner(nf, nu) = -g * If;

    M C = M::Zero(ch.n_y(), nc + nf);
    C.leftCols(nc) = ch.C;

    M D_w1(ch.n_y(), nu + nw);
    D_w1.leftCols(nu) = ch.D_u;
    D_w1.rightCols(nw) = ch.D_w;

    M D_uhat = M::Zero(ch.n_y(), nu);

    M selector = M::Zero(nf, nc + nf);
    selector.rightCols(nf) = If;

    return EqualizerPlant<Scalar>(std::move(A), std::move(B_uhat), std::move(B_w1),
                                  std::move(C), std::move(D_w1), std::move(D_uhat),
                                  std::move(selector));
}

// Bundled optical-cavity equalization example (the `paper-example` preset):
// a detuned cavity with two beam splitters as the channel, a first-order
// low-pass weight, and the weights used by the demo.
struct DemoConstants {
    double kappa = 5.0;      // cavity decay rate
    double k = 0.4;          // beam splitter transmissivity
    double omega = 10.0;     // cavity detuning
    double tau = 0.1;        // low-pass filter time constant
    double mu = 0.1;         // control penalty
    double m() const { return std::sqrt(1.0 - k * k); }
};

Channel<Complex> demo_channel(const DemoConstants& c = {});
LowPassFilter demo_filter(const DemoConstants& c = {});
EqualizerPlant<Complex> demo_plant_passive(const DemoConstants& c = {});
EqualizerPlant<double> demo_plant_active(const DemoConstants& c = {});

}  // namespace qeq
