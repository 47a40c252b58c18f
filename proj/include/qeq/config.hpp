#pragma once

// Problem configuration: JSON ingestion with shape validation, the bundled
// preset, and a canonical echo used for reproducibility.

#include <optional>
#include <string>

#include "qeq/model.hpp"

namespace qeq {

inline bool exact_equal(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 || a.cwiseEqual(b).all());
}

struct ChannelConfig {
    // Complex-valued storage; active mode requires zero imaginary parts.
    ComplexMatrix A, B_u, B_w, C, D_u, D_w;

    bool operator==(const ChannelConfig& o) const {
        return exact_equal(A, o.A) && exact_equal(B_u, o.B_u) &&
               exact_equal(B_w, o.B_w) && exact_equal(C, o.C) &&
               exact_equal(D_u, o.D_u) && exact_equal(D_w, o.D_w);
    }
};

struct PsdGrid {
    double omega_min = 1e-2;
    double omega_max = 1e3;
    Index points = 2000;  // log-spaced; resonances get extra linear refinement

    bool operator==(const PsdGrid&) const = default;
};

struct ProblemConfig {
    Mode mode = Mode::kPassive;
    std::optional<std::string> preset;       // exactly one of preset / channel
    std::optional<ChannelConfig> channel;
    double tau = 0.1;                        // low-pass filter time constant
    ComplexMatrix R1, R2;                    // weights on e_bar and uhat
    double mu = 1.0;
    PsdGrid psd;
    std::string out_dir;

    bool operator==(const ProblemConfig& o) const {
        return mode == o.mode && preset == o.preset && channel == o.channel &&
               tau == o.tau && exact_equal(R1, o.R1) && exact_equal(R2, o.R2) &&
               mu == o.mu && psd == o.psd && out_dir == o.out_dir;
    }
};

// Parses and validates a JSON configuration. Dimension failures name the
// offending key and the expected shape; JSON syntax errors carry the parser's
// line/column diagnostics. Preset configs come back fully populated.
ProblemConfig parse_config(const std::string& text);

// Canonical JSON echo; parse_config(echo_config(c)) == c.
std::string echo_config(const ProblemConfig& cfg);

// Known preset name for the bundled cavity example.
inline constexpr const char* kDemoPreset = "paper-example";

}  // namespace qeq
