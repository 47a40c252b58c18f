#include "qeq/model.hpp"

namespace qeq {

ComplexMatrix quadrature_conversion(Index k) {
    require(k >= 0, "quadrature_conversion: negative dimension");
    ComplexMatrix phi = ComplexMatrix::Zero(2 * k, 2 * k);
    const Complex mi(0.0, -1.0);
    const Complex pi_(0.0, 1.0);
    for (Index j = 0; j < k; ++j) {
        phi(2 * j, j) = 1.0;          // q_j = a_j + a_j^#
        phi(2 * j, k + j) = 1.0;
        phi(2 * j + 1, j) = mi;       // p_j = -i a_j + i a_j^#
        phi(2 * j + 1, k + j) = pi_;
    }
    return phi;
}

RealMatrix quadrature_image(const ComplexMatrix& M) {
    const Index p = M.rows();
    const Index q = M.cols();
    ComplexMatrix doubled = ComplexMatrix::Zero(2 * p, 2 * q);
    doubled.topLeftCorner(p, q) = M;
    doubled.bottomRightCorner(p, q) = M.conjugate();
    const ComplexMatrix phi_p = quadrature_conversion(p);
    // Phi Phi^dagger = 2I, so Phi^-1 = Phi^dagger / 2.
    const ComplexMatrix phi_q_inv = 0.5 * quadrature_conversion(q).adjoint();
    const ComplexMatrix img = phi_p * doubled * phi_q_inv;
    return realify(img, 1e-12, "quadrature_image");
}

QuadratureSystem to_quadrature(const AnnihilationSystem& sys) {
    return QuadratureSystem(quadrature_image(sys.F), quadrature_image(sys.G),
                            quadrature_image(sys.H), quadrature_image(sys.J));
}

Channel<double> to_quadrature(const Channel<Complex>& ch) {
    return Channel<double>(quadrature_image(ch.A), quadrature_image(ch.B_u),
                           quadrature_image(ch.B_w), quadrature_image(ch.C),
                           quadrature_image(ch.D_u), quadrature_image(ch.D_w));
}

namespace {

template <typename Scalar>
void series_blocks(const Matrix<Scalar>& F2, const Matrix<Scalar>& G2,
                   const Matrix<Scalar>& H2, const Matrix<Scalar>& J2,
                   const Matrix<Scalar>& F1, const Matrix<Scalar>& G1,
                   const Matrix<Scalar>& H1, const Matrix<Scalar>& J1,
                   Matrix<Scalar>& F, Matrix<Scalar>& G, Matrix<Scalar>& H,
                   Matrix<Scalar>& J) {
    require(G2.cols() == H1.rows(),
            "series_connect: output of the first system must match the input "
            "of the second");
    const Index n1 = F1.rows();
    const Index n2 = F2.rows();
    F = Matrix<Scalar>::Zero(n1 + n2, n1 + n2);
    F.topLeftCorner(n1, n1) = F1;
    F.bottomLeftCorner(n2, n1) = G2 * H1;
    F.bottomRightCorner(n2, n2) = F2;
    G = Matrix<Scalar>(n1 + n2, G1.cols());
    G.topRows(n1) = G1;
    G.bottomRows(n2) = G2 * J1;
    H = Matrix<Scalar>(H2.rows(), n1 + n2);
    H.leftCols(n1) = J2 * H1;
    H.rightCols(n2) = H2;
    J = J2 * J1;
}

}  // namespace

AnnihilationSystem series_connect(const AnnihilationSystem& second,
                                  const AnnihilationSystem& first) {
    ComplexMatrix F, G, H, J;
    series_blocks<Complex>(second.F, second.G, second.H, second.J, first.F,
                           first.G, first.H, first.J, F, G, H, J);
    return AnnihilationSystem(F, G, H, J);
}

QuadratureSystem series_connect(const QuadratureSystem& second,
                                const QuadratureSystem& first) {
    RealMatrix F, G, H, J;
    series_blocks<double>(second.A, second.B, second.C, second.D, first.A,
                          first.B, first.C, first.D, F, G, H, J);
    return QuadratureSystem(F, G, H, J);
}

Channel<Complex> demo_channel(const DemoConstants& c) {
    const double root = std::sqrt(2.0 * c.kappa);
    const double m = c.m();
    ComplexMatrix A(1, 1), B_u(1, 1), B_w(1, 1), C(1, 1), D_u(1, 1), D_w(1, 1);
    A << Complex(-c.k, c.omega);
    B_u << Complex(-c.k * root, 0.0);
    B_w << Complex(-m * root, 0.0);
    C << Complex(c.k * root, 0.0);
    D_u << Complex(c.k * c.k - m * m, 0.0);
    D_w << Complex(2.0 * c.k * m, 0.0);
    return Channel<Complex>(A, B_u, B_w, C, D_u, D_w);
}

LowPassFilter demo_filter(const DemoConstants& c) { return LowPassFilter(c.tau, 1); }

EqualizerPlant<Complex> demo_plant_passive(const DemoConstants& c) {
    return compose_equalizer_plant(demo_channel(c), demo_filter(c));
}

EqualizerPlant<double> demo_plant_active(const DemoConstants& c) {
    const EqualizerPlant<Complex> p = demo_plant_passive(c);
    return EqualizerPlant<double>(
        quadrature_image(p.A), quadrature_image(p.B_uhat),
        quadrature_image(p.B_w1), quadrature_image(p.C),
        quadrature_image(p.D_w1), quadrature_image(p.D_uhat),
        quadrature_image(p.perf_selector));
}

}  // namespace qeq
