// Acceptance suite: exercises the full synthesis pipeline end to end and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qeq/run.hpp"

using namespace qeq;

namespace {

int failures = 0;

void report(int id, const char* label, bool pass, const std::string& detail) {
    std::printf("[%d] %-34s %s  (%s)\n", id, label, pass ? "PASS" : "FAIL",
                detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

std::mt19937 rng(1701u);

RealMatrix random_matrix(Index r, Index c) {
    std::normal_distribution<double> dist(0.0, 1.0);
    RealMatrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

ComplexMatrix random_complex(Index r, Index c) {
    ComplexMatrix m(r, c);
    m.real() = random_matrix(r, c);
    m.imag() = random_matrix(r, c);
    return m;
}

RealMatrix random_hurwitz(Index n) {
    RealMatrix a = random_matrix(n, n);
    Eigen::EigenSolver<RealMatrix> es(a, false);
    a -= (es.eigenvalues().real().maxCoeff() + 0.5) * RealMatrix::Identity(n, n);
    return a;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct DemoRuns {
    RunArtifacts passive;
    RunArtifacts active;
    double passive_seconds = 0.0;
    double active_seconds = 0.0;
};

DemoRuns run_demo() {
    DemoRuns out;
    auto t0 = std::chrono::steady_clock::now();
    out.passive = run_synthesis(
        parse_config(R"({"preset":"paper-example","mode":"passive"})"));
    out.passive_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    out.active = run_synthesis(
        parse_config(R"({"preset":"paper-example","mode":"active"})"));
    out.active_seconds = seconds_since(t0);
    return out;
}

// Shared pieces of the demo problem, re-derived once for the detailed checks.
struct DemoPieces {
    EqualizerPlant<Complex> plant = demo_plant_passive();
    LqgWeights<Complex> weights{ComplexMatrix::Identity(1, 1),
                                ComplexMatrix::Identity(1, 1), 0.1};
    LqgSynthesis<Complex> syn;
    EqualizerPlant<double> aplant = demo_plant_active();
    LqgWeights<double> aweights{RealMatrix::Identity(2, 2),
                                RealMatrix::Identity(2, 2), 0.1};
    LqgSynthesis<double> asyn;

    DemoPieces() {
        syn = synthesize(plant, weights, assemble_noise(plant));
        asyn = synthesize(aplant, aweights, assemble_noise(aplant));
    }
};

void criterion_1_2(const DemoRuns& demo) {
    const double jp = demo.passive.report.cost;
    const double rel_p = std::abs(jp - 18.05) / 18.05;
    bool pass = rel_p <= 0.05 && demo.passive_seconds < 1.0;
    std::string detail =
        fmt("J=%.4f vs 18.05, rel err %.2e", jp, rel_p) +
        fmt(", %.3f s", demo.passive_seconds);
    if (rel_p > 0.05)
        detail += fmt("; half-intensity value %.4f",
                      demo.passive.report.cost_half_convention);
    report(1, "passive demo cost", pass, detail);

    const double ja = demo.active.report.cost;
    const double rel_a = std::abs(ja - 16.17) / 16.17;
    pass = rel_a <= 0.05 && ja <= jp && demo.active_seconds < 1.0;
    detail = fmt("J=%.4f vs 16.17, rel err %.2e", ja, rel_a) +
             fmt(", active<=passive: %.4f<=%.4f", ja, jp) +
             fmt(", %.3f s", demo.active_seconds);
    if (rel_a > 0.05)
        detail += fmt("; half-intensity value %.4f",
                      demo.active.report.cost_half_convention);
    report(2, "active demo cost and ordering", pass, detail);
}

void criterion_3(const DemoPieces& pieces) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    double worst = 0.0;

    auto check_one = [&](const ClassicalController<double>& ctrl) {
        const auto coh = complete_active(ctrl);
        RealMatrix B(ctrl.A_k.rows(),
                     coh.B_v1.cols() + coh.B_v2.cols() + ctrl.B_y.cols());
        B << coh.B_v1, coh.B_v2, coh.B_y;
        RealMatrix D = RealMatrix::Zero(ctrl.C_k.rows(), B.cols());
        D.leftCols(ctrl.C_k.rows()).setIdentity();
        const auto chk = verify_active_pr(
            QuadratureSystem(coh.A_k, B, coh.C_k, D),
            ChannelPartition{coh.B_v1.cols() + coh.B_v2.cols(), ctrl.B_y.cols()});
        const double tol = 1e-8 * (1.0 + ctrl.A_k.norm());
        worst = std::max(worst,
                         std::max(chk.residual_dynamics, chk.residual_output) /
                             (1.0 + ctrl.A_k.norm()));
        pass = pass && chk.ok && chk.residual_dynamics <= tol &&
               chk.residual_output <= tol;
    };

    check_one(pieces.asyn.controller);
    for (int trial = 0; trial < 100; ++trial) {
        ClassicalController<double> ctrl;
        const Index n_k = 2 * (1 + Index(trial % 3));
        const Index n_u = 2 * (1 + Index((trial / 3) % 2));
        const Index n_y = 2 * (1 + Index((trial / 6) % 2));
        ctrl.A_k = random_hurwitz(n_k);
        ctrl.B_y = random_matrix(n_k, n_y);
        ctrl.C_k = random_matrix(n_u, n_k);
        check_one(ctrl);
    }
    const double secs = seconds_since(t0);
    report(3, "active completion realizability", pass && secs < 10.0,
           fmt("worst scaled residual %.2e over 101 controllers, %.2f s", worst,
               secs));
}

void criterion_4(const DemoPieces& pieces) {
    const auto chk = check_passive_realizable(pieces.syn.controller.A_k,
                                              pieces.syn.controller.B_y,
                                              pieces.syn.controller.C_k);
    bool pass = chk.realizable;

    const auto coh = complete_passive(pieces.syn.controller.A_k,
                                      pieces.syn.controller.B_y,
                                      pieces.syn.controller.C_k);
    ComplexMatrix g_total(coh.A_k.rows(),
                          coh.B_v1.cols() + coh.B_v2.cols() + coh.B_y.cols());
    g_total << coh.B_v1, coh.B_v2, coh.B_y;
    const double identity_res =
        (coh.A_k + coh.A_k.adjoint() + g_total * g_total.adjoint()).norm();
    pass = pass && identity_res <= 1e-7 * (1.0 + coh.A_k.norm());

    double worst_transfer = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double w = (i == 0) ? 0.0 : std::pow(10.0, -2.0 + 4.0 * i / 9.0);
        const ComplexMatrix t0 = frequency_response<Complex>(
            pieces.syn.controller.A_k, pieces.syn.controller.B_y,
            pieces.syn.controller.C_k, ComplexMatrix::Zero(1, 1),
            Complex(0.0, w));
        const ComplexMatrix t1 = frequency_response<Complex>(
            coh.A_k, coh.B_y, coh.C_k, ComplexMatrix::Zero(1, 1),
            Complex(0.0, w));
        worst_transfer =
            std::max(worst_transfer, (t1 - t0).norm() / (1.0 + t0.norm()));
    }
    pass = pass && worst_transfer <= 1e-8;
    report(4, "passive completion fidelity", pass,
           fmt("hinf=%.4f, identity residual %.2e, transfer drift %.2e",
               chk.hinf, identity_res, worst_transfer));
}

void criterion_5() {
    bool pass = true;
    std::string detail;

    auto care_scalar = [](double a, double b, double q, double r) {
        RealMatrix A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
        A << a;
        B << b;
        Q << q;
        R << r;
        return solve_care(A, B, Q, R).value(0, 0);
    };
    pass = pass && std::abs(care_scalar(0, 1, 1, 1) - 1.0) <= 1e-9;
    pass = pass && std::abs(care_scalar(-1, 1, 0, 1)) <= 1e-9;
    pass = pass &&
           std::abs(care_scalar(1, 1, 1, 1) - (1.0 + std::sqrt(2.0))) <= 1e-9;

    {
        RealMatrix a(1, 1), n(1, 1);
        a << -1.0;
        n << 2.0;
        pass = pass && std::abs(solve_lyapunov(a, n).value(0, 0) - 1.0) <= 1e-10;
        RealMatrix a2 = RealMatrix::Zero(2, 2);
        a2.diagonal() << -1.0, -2.0;
        const RealMatrix x2 =
            solve_lyapunov(a2, RealMatrix(RealMatrix::Identity(2, 2))).value;
        pass = pass && std::abs(x2(0, 0) - 0.5) <= 1e-10 &&
               std::abs(x2(1, 1) - 0.25) <= 1e-10;
        RealMatrix a3(2, 2), n3(2, 2);
        a3 << 0, 1, -2, -3;
        n3 << 0, 0, 0, 2;
        const RealMatrix x3 = solve_lyapunov(a3, n3).value;
        pass = pass && std::abs(x3(0, 0) - 1.0 / 6.0) <= 1e-10 &&
               std::abs(x3(1, 1) - 1.0 / 3.0) <= 1e-10;
    }

    RealMatrix f(2, 2), g(2, 1), h(1, 2);
    f << 0, 1, -1, -0.2;
    g << 0, 1;
    h << 1, 0;
    const double norm = hinf_norm(f, g, h);

    // Independent oracle: dense frequency sweep around the resonance.
    RealVector omegas(20001);
    for (Index i = 0; i < omegas.size(); ++i)
        omegas(i) = 0.8 + 0.4 * double(i) / double(omegas.size() - 1);
    const double oracle =
        gain_sweep_max(complexify(f), complexify(g), complexify(h), omegas);
    const double closed_form = 1.0 / (0.2 * std::sqrt(0.99));
    pass = pass && std::abs(norm - 5.0252) / 5.0252 <= 1e-3;
    pass = pass && std::abs(norm - oracle) / oracle <= 1e-3;
    pass = pass && std::abs(norm - closed_form) / closed_form <= 1e-6;

    report(5, "solver reference values", pass,
           fmt("hinf %.6f vs sweep %.6f vs closed form %.6f", norm, oracle,
               closed_form));
}

void criterion_6(const DemoPieces& pieces) {
    const auto ref_p =
        reference_loop_passive(pieces.plant, pieces.syn.controller,
                               pieces.weights);
    const auto acoh = complete_active(pieces.asyn.controller);
    const auto ref_a = reference_loop_active(pieces.aplant, acoh, pieces.aweights);

    const double jp = evaluate_cost(ref_p).J;
    const double ja = evaluate_cost(ref_a).J;
    const double pp = parseval_cost(ref_p);
    const double pa = parseval_cost(ref_a);
    bool pass = std::abs(pp - jp) / jp <= 0.02 && std::abs(pa - ja) / ja <= 0.02;

    // Time-domain marching oracle.
    auto march_cost = [](const auto& cl) {
        Eigen::ComplexEigenSolver<ComplexMatrix> es(complexify(cl.A_cl), false);
        const double slowest = -es.eigenvalues().real().maxCoeff();
        const double dt = 0.05 / cl.A_cl.norm();
        const auto sigma = covariance_march(cl, dt, 10.0 / slowest);
        return std::real(Complex((cl.R_bar * sigma).trace()));
    };
    const double mp = march_cost(ref_p);
    const double ma = march_cost(ref_a);
    pass = pass && std::abs(mp - jp) / jp <= 0.005 &&
           std::abs(ma - ja) / ja <= 0.005;

    report(6, "parseval and marching cross-checks", pass,
           fmt("passive: lyap %.4f / parseval %.4f / march %.4f", jp, pp, mp) +
               fmt("; active: %.4f / %.4f / %.4f", ja, pa, ma));
}

void criterion_7() {
    bool pass = true;
    double worst = 0.0;

    auto roundtrip = [&](const RealMatrix& r, const ComplexMatrix& lambda,
                         Index n_y) {
        const QuadratureSystem sys = oscillator_realization(r, lambda, n_y);
        const OscillatorParams params = recover_oscillator(sys);
        const QuadratureSystem recon =
            oscillator_realization(params.R, params.Lambda, n_y);
        double err = (recon.A - sys.A).norm() / (1.0 + sys.A.norm());
        err = std::max(err, (recon.B - sys.B).norm() / (1.0 + sys.B.norm()));
        err = std::max(err, (recon.C - sys.C).norm() / (1.0 + sys.C.norm()));
        err = std::max(err, (recon.D - sys.D).norm());
        worst = std::max(worst, err);
        pass = pass && err <= 1e-8;
    };

    // Cavity example.
    const double half_g = 0.5 * std::sqrt(5.0);
    ComplexMatrix cavity_lambda(1, 2);
    cavity_lambda << Complex(half_g, 0.0), Complex(0.0, half_g);
    roundtrip(RealMatrix::Zero(2, 2), cavity_lambda, 2);

    for (int trial = 0; trial < 50; ++trial) {
        const Index modes = 1 + Index(trial % 2);
        const Index n = 2 * modes;
        const Index cap_w = 1 + Index(trial % 3);
        const Index n_y = 2 * (1 + Index((trial / 2) % cap_w));
        RealMatrix r = random_matrix(n, n);
        r = 0.5 * (r + r.transpose()).eval();
        roundtrip(r, random_complex(cap_w, n), n_y);
    }
    report(7, "oscillator parameter recovery", pass,
           fmt("worst reconstruction error %.2e over 51 systems", worst));
}

struct CsvCurve {
    std::vector<double> omega;
    std::vector<std::vector<double>> columns;  // per psd column, incl. total
};

CsvCurve parse_csv(const std::string& csv) {
    CsvCurve out;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        out.omega.push_back(std::stod(cell));
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            if (out.columns.size() <= col) out.columns.emplace_back();
            out.columns[col].push_back(std::stod(cell));
            ++col;
        }
    }
    return out;
}

// Local maximum of a curve restricted to [lo, hi].
double local_peak(const CsvCurve& c, const std::vector<double>& values,
                  double lo, double hi) {
    double best_w = 0.0, best = -1.0;
    for (std::size_t i = 1; i + 1 < c.omega.size(); ++i) {
        if (c.omega[i] < lo || c.omega[i] > hi) continue;
        if (values[i] >= values[i - 1] && values[i] >= values[i + 1] &&
            values[i] > best) {
            best = values[i];
            best_w = c.omega[i];
        }
    }
    return best_w;
}

void criterion_8(const DemoRuns& demo, const DemoPieces& pieces) {
    // Active curve: the control-effort component of the emitted PSD peaks at
    // the cavity resonance.
    const CsvCurve act = parse_csv(demo.active.psd_csv);
    std::vector<double> act_effort(act.omega.size());
    for (std::size_t i = 0; i < act.omega.size(); ++i)
        act_effort[i] = act.columns[3][i] + act.columns[4][i];
    const double peak_a = local_peak(act, act_effort, 5.0, 15.0);

    // Passive curve: the loop is a detuned (complex) system, so the resonance
    // shows up as the two-sided asymmetry of the error component; the demo
    // emits two-sided values for exactly this reason.
    const CsvCurve pas = parse_csv(demo.passive.psd_shared_csv);
    double peak_p = 0.0, best_dev = -1.0;
    for (std::size_t i = 0; i < pas.omega.size(); ++i) {
        const double w = pas.omega[i];
        if (w < 5.0 || w > 15.0) continue;
        const auto mirror = std::find(pas.omega.begin(), pas.omega.end(), -w);
        if (mirror == pas.omega.end()) continue;
        const std::size_t j = std::size_t(mirror - pas.omega.begin());
        const double dev =
            std::abs(std::log(pas.columns[1][i] / pas.columns[1][j]));
        if (dev > best_dev) {
            best_dev = dev;
            peak_p = w;
        }
    }

    bool pass = std::abs(peak_p - 10.0) <= 0.5 && std::abs(peak_a - 10.0) <= 0.5;

    // Integrated curves respect the cost ordering.
    const auto ref_p = reference_loop_passive(pieces.plant, pieces.syn.controller,
                                              pieces.weights);
    const auto acoh = complete_active(pieces.asyn.controller);
    const auto ref_a =
        reference_loop_active(pieces.aplant, acoh, pieces.aweights);
    const double ip = parseval_cost(ref_p);
    const double ia = parseval_cost(ref_a);
    pass = pass && ia <= ip;

    report(8, "psd resonance and ordering", pass,
           fmt("features at %.3f (asymmetry) and %.3f (effort peak)", peak_p,
               peak_a) +
               fmt("; integrals active %.3f <= passive %.3f", ia, ip));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    const DemoRuns demo = run_demo();
    const DemoPieces pieces;

    criterion_1_2(demo);
    criterion_3(pieces);
    criterion_4(pieces);
    criterion_5();
    criterion_6(pieces);
    criterion_7();
    criterion_8(demo, pieces);

    std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
