#include "qeq/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qeq {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt(Complex z) {
    if (z.imag() == 0.0) return fmt(z.real());
    return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) +
           "i";
}

void print_matrix(std::ostream& os, const std::string& name,
                  const ComplexMatrix& m) {
    os << name << " (" << m.rows() << "x" << m.cols() << "):\n";
    for (Index i = 0; i < m.rows(); ++i) {
        os << "  ";
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) os << "  ";
            os << fmt(m(i, j));
        }
        os << "\n";
    }
}

void print_solve_report(std::ostream& os, const std::string& name,
                        const SolveReport& r) {
    os << name << ": residual=" << fmt(r.residual_norm)
       << " iterations=" << r.iterations << " conditioning=" << fmt(r.conditioning)
       << "\n";
}

Channel<Complex> channel_from_config(const ChannelConfig& cc) {
    return Channel<Complex>(cc.A, cc.B_u, cc.B_w, cc.C, cc.D_u, cc.D_w);
}

std::vector<double> resonance_frequencies(const ComplexMatrix& A_cl) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(A_cl, false);
    std::vector<double> out;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double w = std::abs(es.eigenvalues()(i).imag());
        if (w > 1e-9) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-6; }),
              out.end());
    return out;
}

std::string render_csv(const PsdResult& p) {
    std::ostringstream os;
    os << "omega,psd_total";
    for (Index i = 0; i < p.per_output.rows(); ++i) os << ",psd_out_" << (i + 1);
    os << "\n";
    for (Index k = 0; k < p.omega.size(); ++k) {
        os << fmt(p.omega(k)) << "," << fmt(p.total(k));
        for (Index i = 0; i < p.per_output.rows(); ++i)
            os << "," << fmt(p.per_output(i, k));
        os << "\n";
    }
    return os.str();
}

// Complex (passive-path) loops are not conjugate symmetric, so their CSV
// carries two-sided values; real loops keep the positive grid.
RealVector maybe_mirror(const RealVector& grid, bool two_sided) {
    if (!two_sided) return grid;
    RealVector out(2 * grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
        out(i) = -grid(grid.size() - 1 - i);
        out(grid.size() + i) = grid(i);
    }
    return out;
}

}  // namespace

RealVector psd_grid(const PsdGrid& grid, const std::vector<double>& resonances) {
    std::set<double> pts;
    for (Index i = 0; i < grid.points; ++i) {
        const double t = double(i) / double(grid.points - 1);
        pts.insert(grid.omega_min *
                   std::pow(grid.omega_max / grid.omega_min, t));
    }
    for (double w : resonances) {
        if (w <= 0.0) continue;
        const double lo = std::max(w - 5.0, grid.omega_min);
        const double hi = std::min(w + 5.0, grid.omega_max);
        if (hi <= lo) continue;
        const int refine = 500;
        for (int i = 0; i <= refine; ++i)
            pts.insert(lo + (hi - lo) * double(i) / double(refine));
    }
    RealVector out(Index(pts.size()));
    Index k = 0;
    for (double w : pts) out(k++) = w;
    return out;
}

EqualizerPlant<Complex> build_passive_plant(const ProblemConfig& cfg) {
    require(cfg.mode == Mode::kPassive, "build_passive_plant: wrong mode");
    const Channel<Complex> ch = channel_from_config(*cfg.channel);
    return compose_equalizer_plant(ch, LowPassFilter(cfg.tau, ch.n_u()));
}

EqualizerPlant<double> build_active_plant(const ProblemConfig& cfg) {
    require(cfg.mode == Mode::kActive, "build_active_plant: wrong mode");
    const ChannelConfig& cc = *cfg.channel;
    Channel<double> ch;
    if (cfg.preset) {
        // Preset channels are stored in annihilation form.
        ch = to_quadrature(channel_from_config(cc));
    } else {
        ch = Channel<double>(cc.A.real(), cc.B_u.real(), cc.B_w.real(),
                             cc.C.real(), cc.D_u.real(), cc.D_w.real());
    }
    return compose_equalizer_plant(ch, LowPassFilter(cfg.tau, ch.n_u()));
}

RunArtifacts run_synthesis(const ProblemConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunArtifacts out;
    SynthesisReport& rep = out.report;
    rep.mode = cfg.mode;

    std::ostringstream os;
    os << "coherent LQG equalizer synthesis report\n";
    os << "mode: " << to_string(cfg.mode) << "\n";

    PsdResult psd_result;
    PsdResult psd_shared_result;

    if (cfg.mode == Mode::kPassive) {
        const EqualizerPlant<Complex> plant = build_passive_plant(cfg);
        LqgWeights<Complex> weights{cfg.R1, cfg.R2, cfg.mu};

        const NoiseModel<Complex> noise = assemble_noise(plant);
        const LqgSynthesis<Complex> syn = synthesize(plant, weights, noise);
        rep.P = syn.P;
        rep.Q = syn.Q;
        rep.F = syn.F;
        rep.K = syn.K;
        rep.care_control = syn.control_report;
        rep.care_filter = syn.filter_report;

        const PassiveRealizability chk = check_passive_realizable(
            syn.controller.A_k, syn.controller.B_y, syn.controller.C_k);
        rep.hinf = chk.hinf;
        if (!chk.realizable) {
            std::ostringstream err;
            err << "passive realizability: controller violates the bounded-real "
                   "condition (hurwitz="
                << chk.hurwitz << ", controllable=" << chk.controllable
                << ", observable=" << chk.observable
                << ", attained H-infinity norm = " << fmt(chk.hinf)
                << " must be <= 1)";
            throw SynthesisError(err.str());
        }

        const CoherentController<Complex> coh = complete_passive(
            syn.controller.A_k, syn.controller.B_y, syn.controller.C_k);
        rep.A_k = coh.A_k;
        rep.B_y = coh.B_y;
        rep.C_k = coh.C_k;
        rep.B_v1 = coh.B_v1;
        rep.B_v2 = coh.B_v2;

        const ClosedLoop<Complex> physical = close_loop(plant, coh, weights);
        const CostResult<Complex> phys_cost = evaluate_cost(physical);
        rep.cost_shared_field = phys_cost.J;

        const ClosedLoop<Complex> reference =
            reference_loop_passive(plant, syn.controller, weights);
        const CostResult<Complex> ref_cost = evaluate_cost(reference);
        rep.cost = ref_cost.J;
        rep.cost_half_convention = 0.5 * ref_cost.J;
        rep.cost_lyapunov = ref_cost.report;

        const RealVector grid = maybe_mirror(
            psd_grid(cfg.psd, resonance_frequencies(complexify(reference.A_cl))),
            true);
        psd_result = psd(reference, grid);
        psd_shared_result = psd(physical, grid);

        print_matrix(os, "plant.A", plant.A);
        print_matrix(os, "plant.B_uhat", plant.B_uhat);
        print_matrix(os, "plant.B_w1", plant.B_w1);
        print_matrix(os, "plant.C", plant.C);
        print_matrix(os, "plant.D_w1", plant.D_w1);
        print_matrix(os, "riccati.P", syn.P);
        print_matrix(os, "riccati.Q", syn.Q);
        print_matrix(os, "gain.F", syn.F);
        print_matrix(os, "gain.K", syn.K);
        print_matrix(os, "controller.A_k", coh.A_k);
        print_matrix(os, "controller.B_y", coh.B_y);
        print_matrix(os, "controller.C_k", coh.C_k);
        print_matrix(os, "controller.B_v1", coh.B_v1);
        print_matrix(os, "controller.B_v2", coh.B_v2);
        print_matrix(os, "controller.state_transform", coh.state_transform);
        os << "realizability: hurwitz=" << chk.hurwitz
           << " controllable=" << chk.controllable
           << " observable=" << chk.observable << " hinf=" << fmt(chk.hinf)
           << " realizable=" << chk.realizable << "\n";
    } else {
        const EqualizerPlant<double> plant = build_active_plant(cfg);
        LqgWeights<double> weights{cfg.R1.real(), cfg.R2.real(), cfg.mu};

        const NoiseModel<double> noise = assemble_noise(plant);
        const LqgSynthesis<double> syn = synthesize(plant, weights, noise);
        rep.P = complexify(syn.P);
        rep.Q = complexify(syn.Q);
        rep.F = complexify(syn.F);
        rep.K = complexify(syn.K);
        rep.care_control = syn.control_report;
        rep.care_filter = syn.filter_report;

        const CoherentController<double> coh = complete_active(syn.controller);
        rep.A_k = complexify(coh.A_k);
        rep.B_y = complexify(coh.B_y);
        rep.C_k = complexify(coh.C_k);
        rep.B_v1 = complexify(coh.B_v1);
        rep.B_v2 = complexify(coh.B_v2);

        RealMatrix B(coh.A_k.rows(),
                     coh.B_v1.cols() + coh.B_v2.cols() + coh.B_y.cols());
        B << coh.B_v1, coh.B_v2, coh.B_y;
        RealMatrix D = RealMatrix::Zero(coh.C_k.rows(), B.cols());
        D.leftCols(coh.C_k.rows()).setIdentity();
        const ActivePrCheck pr = verify_active_pr(
            QuadratureSystem(coh.A_k, B, coh.C_k, D),
            ChannelPartition{coh.B_v1.cols() + coh.B_v2.cols(), coh.B_y.cols()});
        rep.pr_residual_dynamics = pr.residual_dynamics;
        rep.pr_residual_output = pr.residual_output;

        const ClosedLoop<double> physical = close_loop(plant, coh, weights);
        const CostResult<double> phys_cost = evaluate_cost(physical);
        rep.cost_shared_field = phys_cost.J;

        const ClosedLoop<double> reference =
            reference_loop_active(plant, coh, weights);
        const CostResult<double> ref_cost = evaluate_cost(reference);
        rep.cost = ref_cost.J;
        rep.cost_half_convention = 0.5 * ref_cost.J;
        rep.cost_lyapunov = ref_cost.report;

        const RealVector grid = psd_grid(
            cfg.psd, resonance_frequencies(complexify(reference.A_cl)));
        psd_result = psd(reference, grid);
        psd_shared_result = psd(physical, grid);

        print_matrix(os, "plant.A", complexify(plant.A));
        print_matrix(os, "plant.B_uhat", complexify(plant.B_uhat));
        print_matrix(os, "plant.B_w1", complexify(plant.B_w1));
        print_matrix(os, "plant.C", complexify(plant.C));
        print_matrix(os, "plant.D_w1", complexify(plant.D_w1));
        print_matrix(os, "riccati.P", rep.P);
        print_matrix(os, "riccati.Q", rep.Q);
        print_matrix(os, "gain.F", rep.F);
        print_matrix(os, "gain.K", rep.K);
        print_matrix(os, "controller.A_k", rep.A_k);
        print_matrix(os, "controller.B_y", rep.B_y);
        print_matrix(os, "controller.C_k", rep.C_k);
        print_matrix(os, "controller.B_v1", rep.B_v1);
        print_matrix(os, "controller.B_v2", rep.B_v2);
        os << "realizability residuals: dynamics=" << fmt(pr.residual_dynamics)
           << " output=" << fmt(pr.residual_output) << " (pass=" << pr.ok
           << ")\n";
    }

    print_solve_report(os, "riccati.control", rep.care_control);
    print_solve_report(os, "riccati.filter", rep.care_filter);
    print_solve_report(os, "lyapunov.cost", rep.cost_lyapunov);
    os << "cost (reference convention): " << fmt(rep.cost) << "\n";
    os << "cost (shared-field wiring): " << fmt(rep.cost_shared_field) << "\n";
    os << "cost (half-intensity diagnostic): " << fmt(rep.cost_half_convention)
       << "\n";

    out.report_text = os.str();
    out.psd_csv = render_csv(psd_result);
    out.psd_shared_csv = render_csv(psd_shared_result);
    out.config_echo = echo_config(cfg);
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

void write_artifacts(const RunArtifacts& artifacts, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base = dir.empty() ? fs::path(".") : fs::path(dir);
    fs::create_directories(base);
    const auto dump = [&](const char* name, const std::string& text) {
        std::ofstream f(base / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (base / name).string());
        f << text;
    };
    dump("report.txt", artifacts.report_text);
    dump("psd.csv", artifacts.psd_csv);
    dump("psd_shared.csv", artifacts.psd_shared_csv);
    dump("config.json", artifacts.config_echo);
}

PrDiagnostics check_pr(const ProblemConfig& cfg) {
    PrDiagnostics out;
    out.mode = cfg.mode;
    std::ostringstream os;
    if (cfg.mode == Mode::kPassive) {
        const EqualizerPlant<Complex> plant = build_passive_plant(cfg);
        LqgWeights<Complex> weights{cfg.R1, cfg.R2, cfg.mu};
        const LqgSynthesis<Complex> syn =
            synthesize(plant, weights, assemble_noise(plant));
        const PassiveRealizability chk = check_passive_realizable(
            syn.controller.A_k, syn.controller.B_y, syn.controller.C_k);
        os << "passive realizability check\n"
           << "  hurwitz: " << (chk.hurwitz ? "yes" : "no") << "\n"
           << "  controllable: " << (chk.controllable ? "yes" : "no") << "\n"
           << "  observable: " << (chk.observable ? "yes" : "no") << "\n"
           << "  attained H-infinity norm: " << fmt(chk.hinf) << " (must be <= 1)\n"
           << "  physically realizable: " << (chk.realizable ? "yes" : "no")
           << "\n";
        out.ok = chk.realizable;
        if (chk.realizable) {
            const CoherentController<Complex> coh = complete_passive(
                syn.controller.A_k, syn.controller.B_y, syn.controller.C_k);
            const double res =
                (coh.A_k + coh.A_k.adjoint() + coh.B_v1 * coh.B_v1.adjoint() +
                 coh.B_y * coh.B_y.adjoint() + coh.B_v2 * coh.B_v2.adjoint())
                    .norm();
            os << "  completion commutation residual: " << fmt(res) << "\n"
               << "  extra vacuum channels: " << coh.B_v2.cols() << "\n";
        }
    } else {
        const EqualizerPlant<double> plant = build_active_plant(cfg);
        LqgWeights<double> weights{cfg.R1.real(), cfg.R2.real(), cfg.mu};
        const LqgSynthesis<double> syn =
            synthesize(plant, weights, assemble_noise(plant));
        const CoherentController<double> coh = complete_active(syn.controller);
        RealMatrix B(coh.A_k.rows(),
                     coh.B_v1.cols() + coh.B_v2.cols() + coh.B_y.cols());
        B << coh.B_v1, coh.B_v2, coh.B_y;
        RealMatrix D = RealMatrix::Zero(coh.C_k.rows(), B.cols());
        D.leftCols(coh.C_k.rows()).setIdentity();
        const ActivePrCheck pr = verify_active_pr(
            QuadratureSystem(coh.A_k, B, coh.C_k, D),
            ChannelPartition{coh.B_v1.cols() + coh.B_v2.cols(), coh.B_y.cols()});
        os << "active realizability check\n"
           << "  dynamics identity residual: " << fmt(pr.residual_dynamics) << "\n"
           << "  output identity residual: " << fmt(pr.residual_output) << "\n"
           << "  vacuum channels: " << coh.B_v1.cols() << " + " << coh.B_v2.cols()
           << "\n"
           << "  physically realizable: " << (pr.ok ? "yes" : "no") << "\n";
        out.ok = pr.ok;
    }
    out.text = os.str();
    return out;
}

}  // namespace qeq
