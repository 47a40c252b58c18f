#pragma once

// Classical LQG synthesis for the equalizer plant: noise covariance assembly
// from the exogenous input matrices, the control and filter Riccati gains,
// and the output-feedback compensator. The same formulas run over real
// matrices (active path, adjoint = transpose) and complex matrices (passive
// path, adjoint = conjugate transpose).

#include <sstream>

#include <Eigen/Eigenvalues>

#include "qeq/mateq.hpp"
#include "qeq/model.hpp"

namespace qeq {

template <typename Scalar>
struct LqgWeights {
    Matrix<Scalar> R1;  // weight on the performance output e_bar, PSD
    Matrix<Scalar> R2;  // weight on the control uhat, PD
    double mu = 1.0;    // control penalty, folded into R2 at synthesis time
};

template <typename Scalar>
struct NoiseModel {
    Matrix<Scalar> V1;   // process noise intensity
    Matrix<Scalar> V2;   // measurement noise intensity
    Matrix<Scalar> V12;  // cross intensity
};

template <typename Scalar>
struct ClassicalController {
    Matrix<Scalar> A_k, B_y, C_k;

    Index n() const { return A_k.rows(); }
};

template <typename Scalar>
struct LqgSynthesis {
    ClassicalController<Scalar> controller;
    Matrix<Scalar> P;  // control Riccati solution
    Matrix<Scalar> Q;  // filter Riccati solution
    Matrix<Scalar> F;  // state-feedback gain
    Matrix<Scalar> K;  // observer gain
    Matrix<Scalar> state_weight;    // selector^* R1 selector
    Matrix<Scalar> control_weight;  // mu R2
    SolveReport control_report;
    SolveReport filter_report;
};

namespace detail {

template <typename Scalar>
std::string eigenvalue_list(const Matrix<Scalar>& A) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(complexify(Matrix<Scalar>(A)),
                                                false);
    std::ostringstream os;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (i) os << ", ";
        os << es.eigenvalues()(i).real() << (es.eigenvalues()(i).imag() < 0 ? "-" : "+")
           << std::abs(es.eigenvalues()(i).imag()) << "i";
    }
    return os.str();
}

}  // namespace detail

// Noise intensities seen by the filter, with unit intensity per exogenous
// channel: V1 = B_w1 B_w1^*, V2 = D_w1 D_w1^*, V12 = B_w1 D_w1^*.
template <typename Scalar>
NoiseModel<Scalar> assemble_noise(const EqualizerPlant<Scalar>& plant) {
    NoiseModel<Scalar> noise;
    noise.V1 = plant.B_w1 * plant.B_w1.adjoint();
    noise.V2 = plant.D_w1 * plant.D_w1.adjoint();
    noise.V12 = plant.B_w1 * plant.D_w1.adjoint();

    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(noise.V2);
    const double scale = 1.0 + noise.V2.norm();
    if (noise.V2.rows() > 0 && es.eigenvalues().minCoeff() < 1e-12 * scale) {
        std::ostringstream os;
        os << "assemble_noise: measurement noise intensity V2 is singular; "
              "synthesis cannot proceed. Null direction: [";
        const auto v = es.eigenvectors().col(0);
        for (Index i = 0; i < v.size(); ++i) {
            if (i) os << ", ";
            os << v(i);
        }
        os << "]";
        throw SynthesisError(os.str());
    }
    return noise;
}

// Solves the two Riccati equations and forms the output-feedback compensator
//   A_k = A - K C - B_uhat F + K D_uhat F,  B_y = K,  C_k = -F,
// with F = (mu R2)^-1 B_uhat^* P and K = (Q C^* + V12) V2^-1.
template <typename Scalar>
LqgSynthesis<Scalar> synthesize(const EqualizerPlant<Scalar>& plant,
                                const LqgWeights<Scalar>& weights,
                                const NoiseModel<Scalar>& noise) {
    require(weights.mu > 0.0, "synthesize: mu must be positive");
    require(weights.R1.rows() == plant.n_perf(),
            "synthesize: R1 must match the performance output dimension");
    require(weights.R2.rows() == plant.n_uhat(),
            "synthesize: R2 must match the control dimension");

    LqgSynthesis<Scalar> out;
    out.state_weight = hermitian_part<Scalar>(Matrix<Scalar>(
        plant.perf_selector.adjoint() * weights.R1 * plant.perf_selector));
    out.control_weight =
        hermitian_part<Scalar>(Matrix<Scalar>(weights.mu * weights.R2));

    Eigen::LLT<Matrix<Scalar>> rw_llt(out.control_weight);
    require(rw_llt.info() == Eigen::Success,
            "synthesize: mu R2 must be positive definite");

    // Control Riccati: A^*P + PA - P B_uhat (mu R2)^-1 B_uhat^* P + sel^* R1 sel = 0.
    auto care_p = solve_care(plant.A, plant.B_uhat, out.state_weight,
                             out.control_weight);
    out.P = std::move(care_p.value);
    out.control_report = care_p.report;
    out.F = rw_llt.solve(plant.B_uhat.adjoint() * out.P);

    // Filter Riccati in estimator form, with the cross term removed:
    //   At Q + Q At^* - Q C^* V2^-1 C Q + (V1 - V12 V2^-1 V12^*) = 0,
    //   At = A - V12 V2^-1 C.
    Eigen::LLT<Matrix<Scalar>> v2_llt(hermitian_part<Scalar>(noise.V2));
    require(v2_llt.info() == Eigen::Success,
            "synthesize: V2 must be positive definite");
    const Matrix<Scalar> At = plant.A - noise.V12 * v2_llt.solve(plant.C);
    const Matrix<Scalar> Qt = hermitian_part<Scalar>(Matrix<Scalar>(
        noise.V1 - noise.V12 * v2_llt.solve(noise.V12.adjoint())));
    auto care_q =
        solve_care(Matrix<Scalar>(At.adjoint()), Matrix<Scalar>(plant.C.adjoint()),
                   Qt, noise.V2);
    out.Q = std::move(care_q.value);
    out.filter_report = care_q.report;
    out.K = v2_llt.solve(plant.C * out.Q.adjoint() +
                         noise.V12.adjoint())
                .adjoint();

    out.controller.A_k = plant.A - out.K * plant.C - plant.B_uhat * out.F +
                         out.K * plant.D_uhat * out.F;
    out.controller.B_y = out.K;
    out.controller.C_k = -out.F;

    if (!is_hurwitz(out.controller.A_k))
        throw SynthesisError(
            "synthesize: compensator matrix A_k is not Hurwitz; eigenvalues: " +
            detail::eigenvalue_list<Scalar>(out.controller.A_k));
    return out;
}

}  // namespace qeq
