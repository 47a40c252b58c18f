// Command-line front end: synthesize | check-pr | psd | demo.
//
// Exit codes: 0 success, 2 configuration error, 3 synthesis or precondition
// failure, 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qeq/run.hpp"

namespace {

using namespace qeq;

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

ProblemConfig load_config(const std::string& path,
                          const std::string& mode_override) {
    const std::string text = slurp(path);
    if (mode_override.empty()) return parse_config(text);

    // Re-expand preset defaults for the overridden mode; explicit channels
    // just get the mode swapped (dimension checks rerun downstream).
    ProblemConfig cfg = parse_config(text);
    const Mode mode =
        mode_override == "passive" ? Mode::kPassive : Mode::kActive;
    if (cfg.preset) {
        ProblemConfig fresh = parse_config("{\"mode\":\"" + mode_override +
                                           "\",\"preset\":\"" + *cfg.preset +
                                           "\"}");
        fresh.psd = cfg.psd;
        fresh.out_dir = cfg.out_dir;
        return fresh;
    }
    cfg.mode = mode;
    return cfg;
}

ProblemConfig preset_config(Mode mode) {
    const std::string text = std::string("{\"mode\":\"") + to_string(mode) +
                             "\",\"preset\":\"" + kDemoPreset + "\"}";
    return parse_config(text);
}

void apply_grid_overrides(ProblemConfig& cfg, std::optional<double> omega_min,
                          std::optional<double> omega_max,
                          std::optional<Index> points) {
    if (omega_min) cfg.psd.omega_min = *omega_min;
    if (omega_max) cfg.psd.omega_max = *omega_max;
    if (points) cfg.psd.points = *points;
    if (!(cfg.psd.omega_min > 0.0) || !(cfg.psd.omega_max > cfg.psd.omega_min) ||
        cfg.psd.points < 2)
        throw ConfigError("psd grid: requires 0 < omega-min < omega-max and at "
                          "least 2 points");
}

int cmd_synthesize(const ProblemConfig& cfg, const std::string& out_dir) {
    RunArtifacts artifacts = run_synthesis(cfg);
    const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
    write_artifacts(artifacts, dir);
    std::printf("mode: %s\n", to_string(cfg.mode));
    std::printf("cost (reference convention): %.6f\n", artifacts.report.cost);
    std::printf("cost (shared-field wiring): %.6f\n",
                artifacts.report.cost_shared_field);
    std::printf("artifacts written to %s\n", dir.empty() ? "." : dir.c_str());
    std::printf("runtime: %.3f s\n", artifacts.report.runtime_seconds);
    return 0;
}

int cmd_check_pr(const ProblemConfig& cfg) {
    const PrDiagnostics diag = check_pr(cfg);
    std::fputs(diag.text.c_str(), stdout);
    return diag.ok ? 0 : 3;
}

int cmd_psd(const ProblemConfig& cfg, const std::string& out_dir) {
    RunArtifacts artifacts = run_synthesis(cfg);
    namespace fs = std::filesystem;
    const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
    const fs::path base = dir.empty() ? fs::path(".") : fs::path(dir);
    fs::create_directories(base);
    for (const auto& [name, text] :
         {std::pair<const char*, const std::string*>{"psd.csv",
                                                     &artifacts.psd_csv},
          {"psd_shared.csv", &artifacts.psd_shared_csv}}) {
        std::ofstream f(base / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (base / name).string());
        f << *text;
    }
    std::printf("psd written to %s\n", (base / "psd.csv").string().c_str());
    return 0;
}

// Reference cost values attained by the bundled example, used only to decide
// whether the extra half-intensity diagnostic should be surfaced.
constexpr double kDemoReferenceCostPassive = 18.05;
constexpr double kDemoReferenceCostActive = 16.17;

int cmd_demo(const std::string& out_dir) {
    std::printf("bundled optical-cavity equalization example\n");

    ProblemConfig pc = preset_config(Mode::kPassive);
    RunArtifacts passive = run_synthesis(pc);
    write_artifacts(passive, (out_dir.empty() ? std::string(".") : out_dir) +
                                 "/passive");

    ProblemConfig ac = preset_config(Mode::kActive);
    RunArtifacts active = run_synthesis(ac);
    write_artifacts(active, (out_dir.empty() ? std::string(".") : out_dir) +
                                "/active");

    const double jp = passive.report.cost;
    const double ja = active.report.cost;
    std::printf("passive: cost = %.4f (shared-field %.4f, H-inf %.4f)\n", jp,
                passive.report.cost_shared_field, passive.report.hinf);
    std::printf("active : cost = %.4f (shared-field %.4f, PR residuals %.2e / "
                "%.2e)\n",
                ja, active.report.cost_shared_field,
                active.report.pr_residual_dynamics,
                active.report.pr_residual_output);
    std::printf("comparison: active/passive = %.4f (%s)\n", ja / jp,
                ja <= jp ? "active at least as good" : "passive better");

    if (std::abs(jp - kDemoReferenceCostPassive) >
        0.05 * kDemoReferenceCostPassive)
        std::printf("passive cost off the reference value %.2f; half-intensity "
                    "convention would give %.4f\n",
                    kDemoReferenceCostPassive,
                    passive.report.cost_half_convention);
    if (std::abs(ja - kDemoReferenceCostActive) > 0.05 * kDemoReferenceCostActive)
        std::printf("active cost off the reference value %.2f; half-intensity "
                    "convention would give %.4f\n",
                    kDemoReferenceCostActive, active.report.cost_half_convention);

    std::printf("runtime: passive %.3f s, active %.3f s\n",
                passive.report.runtime_seconds, active.report.runtime_seconds);
    std::printf("artifacts written to %s/{passive,active}\n",
                out_dir.empty() ? "." : out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coherent quantum LQG equalizer synthesis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode_override;
    std::string out_dir;
    std::optional<double> omega_min, omega_max;
    std::optional<Index> points;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "configuration file (JSON)")
                ->required();
        cmd->add_option("--mode", mode_override, "override the configured mode")
            ->check(CLI::IsMember({"passive", "active"}));
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* synth = app.add_subcommand("synthesize",
                                         "run the full synthesis pipeline");
    add_common(synth, true);

    CLI::App* checkpr = app.add_subcommand(
        "check-pr", "physical realizability diagnostics for the controller");
    add_common(checkpr, true);

    CLI::App* psd_cmd =
        app.add_subcommand("psd", "closed-loop power spectral density CSV");
    add_common(psd_cmd, true);
    psd_cmd->add_option("--omega-min", omega_min, "grid start (rad/s)");
    psd_cmd->add_option("--omega-max", omega_max, "grid end (rad/s)");
    psd_cmd->add_option("--points", points, "log-spaced point count");

    CLI::App* demo = app.add_subcommand(
        "demo", "run both modes of the bundled example and compare");
    demo->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synthesize(load_config(config_path, mode_override), out_dir);
        if (checkpr->parsed())
            return cmd_check_pr(load_config(config_path, mode_override));
        if (psd_cmd->parsed()) {
            ProblemConfig cfg = load_config(config_path, mode_override);
            apply_grid_overrides(cfg, omega_min, omega_max, points);
            return cmd_psd(cfg, out_dir);
        }
        if (demo->parsed()) return cmd_demo(out_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SynthesisError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
