#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qeq/lqg.hpp"

using namespace qeq;

namespace {

std::mt19937 rng(90210u);

RealMatrix random_matrix(Index r, Index c) {
    std::normal_distribution<double> dist(0.0, 1.0);
    RealMatrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

// Scalar test plant with prescribed noise intensities.
EqualizerPlant<double> scalar_plant(double a) {
    RealMatrix A(1, 1), B_uhat(1, 1), B_w1(1, 2), C(1, 1), D_w1(1, 2), D_uhat(1, 1),
        sel(1, 1);
    A << a;
    B_uhat << 1.0;
    B_w1 << 1.0, 0.0;  // unit process noise, orthogonal to the measurement noise
    C << 1.0;
    D_w1 << 0.0, 1.0;
    D_uhat << 0.0;
    sel << 1.0;
    return EqualizerPlant<double>(A, B_uhat, B_w1, C, D_w1, D_uhat, sel);
}

LqgWeights<Complex> demo_weights() {
    return LqgWeights<Complex>{ComplexMatrix::Identity(1, 1),
                               ComplexMatrix::Identity(1, 1), 0.1};
}

std::vector<Complex> eigenvalues_of(const ComplexMatrix& m) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m, false);
    return {es.eigenvalues().data(),
            es.eigenvalues().data() + es.eigenvalues().size()};
}

bool same_spectrum(std::vector<Complex> a, std::vector<Complex> b, double tol) {
    if (a.size() != b.size()) return false;
    for (Complex x : a) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.size(); ++i)
            if (std::abs(b[i] - x) < dist) {
                dist = std::abs(b[i] - x);
                best = i;
            }
        if (dist > tol * (1.0 + std::abs(x))) return false;
        b.erase(b.begin() + long(best));
    }
    return true;
}

}  // namespace

TEST_CASE("assemble_noise on unit matrices") {
    RealMatrix A(1, 1), B_uhat(1, 1), B_w1(1, 1), C(1, 1), D_w1(1, 1), D_uhat(1, 1),
        sel(1, 1);
    A << -1.0;
    B_uhat << 1.0;
    B_w1 << 1.0;
    C << 1.0;
    D_w1 << 1.0;
    D_uhat << 0.0;
    sel << 1.0;
    const auto noise = assemble_noise(
        EqualizerPlant<double>(A, B_uhat, B_w1, C, D_w1, D_uhat, sel));
    CHECK(noise.V1(0, 0) == doctest::Approx(1.0));
    CHECK(noise.V2(0, 0) == doctest::Approx(1.0));
    CHECK(noise.V12(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("assemble_noise: beam-splitter unitarity makes V2 exactly 1") {
    const auto noise = assemble_noise(demo_plant_passive());
    // (k^2 - m^2)^2 + (2km)^2 = (k^2 + m^2)^2 = 1.
    CHECK(noise.V2(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(noise.V2(0, 0).imag()) <= 1e-15);
}

TEST_CASE("assemble_noise: orthogonal rows give zero cross intensity") {
    const auto noise = assemble_noise(scalar_plant(-1.0));
    CHECK(noise.V12(0, 0) == doctest::Approx(0.0));
    CHECK(noise.V1(0, 0) == doctest::Approx(1.0));
    CHECK(noise.V2(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("assemble_noise rejects singular measurement noise") {
    RealMatrix A(1, 1), B_uhat(1, 1), B_w1(1, 1), C(1, 1), D_w1(1, 1), D_uhat(1, 1),
        sel(1, 1);
    A << -1.0;
    B_uhat << 1.0;
    B_w1 << 1.0;
    C << 1.0;
    D_w1 << 0.0;  // no measurement noise at all
    D_uhat << 0.0;
    sel << 1.0;
    CHECK_THROWS_WITH_AS(
        (void)assemble_noise(
            EqualizerPlant<double>(A, B_uhat, B_w1, C, D_w1, D_uhat, sel)),
        doctest::Contains("Null direction"), SynthesisError);
}

TEST_CASE("synthesize: hand-solved scalar design") {
    const EqualizerPlant<double> plant = scalar_plant(-1.0);
    LqgWeights<double> w{RealMatrix::Identity(1, 1), RealMatrix::Identity(1, 1),
                         1.0};
    const auto syn = synthesize(plant, w, assemble_noise(plant));

    const double root2 = std::sqrt(2.0);
    CHECK(syn.P(0, 0) == doctest::Approx(root2 - 1.0).epsilon(1e-9));
    CHECK(syn.Q(0, 0) == doctest::Approx(root2 - 1.0).epsilon(1e-9));
    CHECK(syn.F(0, 0) == doctest::Approx(0.41421356).epsilon(1e-7));
    CHECK(syn.K(0, 0) == doctest::Approx(0.41421356).epsilon(1e-7));
    CHECK(syn.controller.A_k(0, 0) == doctest::Approx(-1.82842712).epsilon(1e-7));
    CHECK(syn.controller.B_y(0, 0) == doctest::Approx(syn.K(0, 0)));
    CHECK(syn.controller.C_k(0, 0) == doctest::Approx(-syn.F(0, 0)));
}

TEST_CASE("synthesize: zero state weight gives zero actuation") {
    const EqualizerPlant<double> plant = scalar_plant(-1.0);
    LqgWeights<double> w{RealMatrix::Zero(1, 1), RealMatrix::Identity(1, 1), 1.0};
    const auto syn = synthesize(plant, w, assemble_noise(plant));
    CHECK(syn.F.norm() <= 1e-12);
    CHECK(syn.controller.C_k.norm() <= 1e-12);
    // A_k = A - K C when no actuation path remains.
    CHECK(syn.controller.A_k(0, 0) ==
          doctest::Approx(plant.A(0, 0) - syn.K(0, 0) * plant.C(0, 0)));
}

TEST_CASE("separation principle: closed-loop spectrum splits") {
    for (int trial = 0; trial < 12; ++trial) {
        const Index n = 2 + Index(trial % 3);
        // Well-separated drift spectrum keeps the eigenvalue comparison
        // numerically meaningful at the 1e-8 level.
        RealMatrix A = 0.3 * random_matrix(n, n);
        for (Index i = 0; i < n; ++i) A(i, i) += -2.0 + 1.5 * double(i);
        RealMatrix B_uhat = random_matrix(n, 1);
        RealMatrix C = random_matrix(1, n);
        RealMatrix B_w1(n, n + 1);
        B_w1 << random_matrix(n, n), RealMatrix::Zero(n, 1);
        RealMatrix D_w1(1, n + 1);
        D_w1 << RealMatrix::Zero(1, n), RealMatrix::Identity(1, 1);
        const EqualizerPlant<double> plant(
            A, B_uhat, B_w1, C, D_w1, RealMatrix::Zero(1, 1),
            RealMatrix(RealMatrix::Identity(n, n)));
        LqgWeights<double> w{RealMatrix::Identity(n, n),
                             RealMatrix::Identity(1, 1), 1.0};
        LqgSynthesis<double> syn;
        try {
            syn = synthesize(plant, w, assemble_noise(plant));
        } catch (const SynthesisError&) {
            continue;  // compensator itself unstable; separation still holds
                       // for the loop but the API rejects it earlier
        }

        RealMatrix A_cl(2 * n, 2 * n);
        A_cl << A, B_uhat * syn.controller.C_k, syn.controller.B_y * C,
            syn.controller.A_k;

        std::vector<Complex> expected;
        for (Complex lam :
             eigenvalues_of(complexify(RealMatrix(A - B_uhat * syn.F))))
            expected.push_back(lam);
        for (Complex lam : eigenvalues_of(complexify(RealMatrix(A - syn.K * C))))
            expected.push_back(lam);
        CHECK(same_spectrum(expected, eigenvalues_of(complexify(A_cl)), 1e-8));
    }
}

TEST_CASE("control gain shrinks as the penalty grows") {
    const EqualizerPlant<Complex> plant = demo_plant_passive();
    const auto noise = assemble_noise(plant);
    double prev = std::numeric_limits<double>::infinity();
    for (double mu : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        LqgWeights<Complex> w = demo_weights();
        w.mu = mu;
        const auto syn = synthesize(plant, w, noise);
        const double gain = syn.F.norm();
        CHECK(gain < prev);
        prev = gain;
    }
}

TEST_CASE("filter Riccati holds in the printed cross-term form") {
    const EqualizerPlant<Complex> plant = demo_plant_passive();
    const auto noise = assemble_noise(plant);
    const auto syn = synthesize(plant, demo_weights(), noise);

    const ComplexMatrix v2i = noise.V2.inverse();
    const ComplexMatrix At = plant.A - noise.V12 * v2i * plant.C;
    const ComplexMatrix residual =
        At * syn.Q + syn.Q * At.adjoint() -
        syn.Q * plant.C.adjoint() * v2i * plant.C * syn.Q + noise.V1 -
        noise.V12 * v2i * noise.V12.adjoint();
    CHECK(residual.norm() <= 1e-9 * (1.0 + syn.Q.norm()));

    // Gain identity K = (Q C^* + V12) V2^-1.
    const ComplexMatrix k_direct =
        (syn.Q * plant.C.adjoint() + noise.V12) * v2i;
    CHECK((syn.K - k_direct).norm() <= 1e-10 * (1.0 + k_direct.norm()));
}

TEST_CASE("demo synthesis produces a stable compensator on both paths") {
    {
        const EqualizerPlant<Complex> plant = demo_plant_passive();
        const auto syn = synthesize(plant, demo_weights(), assemble_noise(plant));
        CHECK(is_hurwitz(syn.controller.A_k));
    }
    {
        const EqualizerPlant<double> plant = demo_plant_active();
        LqgWeights<double> w{RealMatrix::Identity(2, 2),
                             RealMatrix::Identity(2, 2), 0.1};
        const auto syn = synthesize(plant, w, assemble_noise(plant));
        CHECK(is_hurwitz(syn.controller.A_k));

        // The active design is the quadrature image of the passive one.
        const EqualizerPlant<Complex> pc = demo_plant_passive();
        const auto syn_c = synthesize(pc, demo_weights(), assemble_noise(pc));
        CHECK((syn.controller.A_k - quadrature_image(syn_c.controller.A_k)).norm() <=
              1e-8 * (1.0 + syn.controller.A_k.norm()));
        CHECK((syn.F - quadrature_image(syn_c.F)).norm() <=
              1e-8 * (1.0 + syn.F.norm()));
    }
}
