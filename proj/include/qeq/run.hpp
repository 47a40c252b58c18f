#pragma once

// Synthesis driver behind the CLI: builds the plant from a configuration,
// runs classical LQG synthesis, coherent implementation, closed-loop
// evaluation, and renders the report / PSD CSV artifacts.

#include <string>
#include <vector>

#include "qeq/config.hpp"
#include "qeq/pipeline.hpp"

namespace qeq {

struct RunArtifacts {
    SynthesisReport report;
    std::string report_text;     // deterministic human-readable report
    std::string psd_csv;         // PSD of the reference-convention closed loop
    std::string psd_shared_csv;  // PSD of the physically wired closed loop
    std::string config_echo;     // canonical configuration echo
};

// Full pipeline for one configuration: classical LQG -> coherent
// implementation -> closed loop, cost, and PSD.
RunArtifacts run_synthesis(const ProblemConfig& cfg);

// Writes report.txt, psd.csv, and config.json under dir (created if needed).
void write_artifacts(const RunArtifacts& artifacts, const std::string& dir);

struct PrDiagnostics {
    Mode mode = Mode::kPassive;
    bool ok = false;
    std::string text;
};

// Realizability diagnostics for the synthesized controller (`check-pr`).
PrDiagnostics check_pr(const ProblemConfig& cfg);

// Log-spaced grid over [omega_min, omega_max] with linear refinement windows
// around the given resonance frequencies.
RealVector psd_grid(const PsdGrid& grid, const std::vector<double>& resonances);

// Plant construction from a validated configuration.
EqualizerPlant<Complex> build_passive_plant(const ProblemConfig& cfg);
EqualizerPlant<double> build_active_plant(const ProblemConfig& cfg);

}  // namespace qeq
