#include "qeq/pipeline.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace qeq {

template <typename Scalar>
Matrix<Scalar> covariance_march(const ClosedLoop<Scalar>& cl, double dt,
                                double t_final) {
    require(dt > 0.0 && t_final >= 0.0,
            "covariance_march: dt must be positive and t_final nonnegative");
    require(dt * cl.A_cl.norm() < 0.1,
            "covariance_march: step too large (dt * |A| must stay below 0.1)");
    require(is_hurwitz(cl.A_cl), "covariance_march: A_cl must be Hurwitz");

    const Index n = cl.n();
    const ComplexMatrix A = complexify(cl.A_cl);
    const ComplexMatrix N = complexify(cl.B_cl) * complexify(cl.B_cl).adjoint();

    // exp([[-A, N], [0, A^dagger]] dt) packs both the propagator and the
    // one-step noise integral.
    ComplexMatrix M = ComplexMatrix::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = -A * dt;
    M.topRightCorner(n, n) = N * dt;
    M.bottomRightCorner(n, n) = A.adjoint() * dt;
    const ComplexMatrix E = M.exp();
    const ComplexMatrix phi = E.bottomRightCorner(n, n).adjoint();
    const ComplexMatrix q_step =
        hermitian_part<Complex>(ComplexMatrix(phi * E.topRightCorner(n, n)));

    const auto steps = static_cast<long>(std::llround(t_final / dt));
    ComplexMatrix sigma = ComplexMatrix::Zero(n, n);
    for (long s = 0; s < steps; ++s)
        sigma = hermitian_part<Complex>(
            ComplexMatrix(phi * sigma * phi.adjoint() + q_step));

    if constexpr (std::is_same_v<Scalar, double>)
        return realify(sigma, 1e-9 * (1.0 + sigma.norm()), "covariance_march");
    else
        return sigma;
}

template Matrix<double> covariance_march(const ClosedLoop<double>&, double,
                                         double);
template Matrix<Complex> covariance_march(const ClosedLoop<Complex>&, double,
                                          double);

}  // namespace qeq
