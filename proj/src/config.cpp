#include "qeq/config.hpp"

#include <json.hpp>

namespace qeq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config: \"" + key + "\": " + what);
}

Complex parse_entry(const json& v, const std::string& key) {
    if (v.is_number()) return Complex(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return Complex(v[0].get<double>(), v[1].get<double>());
    fail(key, "matrix entries must be numbers or [re, im] pairs");
}

ComplexMatrix parse_matrix(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty() || !v[0].is_array())
        fail(key, "expected a 2-D array (list of rows)");
    const Index rows = Index(v.size());
    const Index cols = Index(v[0].size());
    if (cols == 0) fail(key, "rows must be non-empty");
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (!v[i].is_array() || Index(v[i].size()) != cols)
            fail(key, "all rows must have " + std::to_string(cols) +
                          " entries (matrix must be rectangular)");
        for (Index j = 0; j < cols; ++j) m(i, j) = parse_entry(v[i][j], key);
    }
    if (!m.allFinite()) fail(key, "entries must be finite");
    return m;
}

void expect_shape(const ComplexMatrix& m, Index rows, Index cols,
                  const std::string& key) {
    if (m.rows() != rows || m.cols() != cols)
        fail(key, "expected shape " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()));
}

void expect_real(const ComplexMatrix& m, const std::string& key) {
    if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() > 0.0)
        fail(key, "active mode requires real matrices");
}

json entry_to_json(Complex c) {
    if (c.imag() == 0.0) return json(c.real());
    return json::array({c.real(), c.imag()});
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(entry_to_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

void fill_preset(ProblemConfig& cfg) {
    const DemoConstants c;
    const Channel<Complex> ch = demo_channel(c);
    cfg.channel = ChannelConfig{ch.A, ch.B_u, ch.B_w, ch.C, ch.D_u, ch.D_w};
    cfg.tau = c.tau;
    cfg.mu = c.mu;
    const Index ne = cfg.mode == Mode::kActive ? 2 : 1;
    cfg.R1 = ComplexMatrix::Identity(ne, ne);
    cfg.R2 = ComplexMatrix::Identity(ne, ne);
}

// Width of the signal u (and of e_bar) once the problem is built. Preset
// channels are stored in annihilation form and double under the active-mode
// quadrature conversion; explicit active channels are already real.
Index signal_width(const ProblemConfig& cfg) {
    Index nu = cfg.channel->B_u.cols();
    if (cfg.mode == Mode::kActive && cfg.preset) nu *= 2;
    return nu;
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    ProblemConfig cfg;
    if (!j.contains("mode") || !j["mode"].is_string())
        fail("mode", "required, \"passive\" or \"active\"");
    const std::string mode = j["mode"].get<std::string>();
    if (mode == "passive")
        cfg.mode = Mode::kPassive;
    else if (mode == "active")
        cfg.mode = Mode::kActive;
    else
        fail("mode", "must be \"passive\" or \"active\", got \"" + mode + "\"");

    const bool has_preset = j.contains("preset");
    const bool has_channel = j.contains("channel");
    if (has_preset == has_channel)
        throw ConfigError(
            "config: exactly one of \"preset\" and \"channel\" must be given");

    if (has_preset) {
        if (!j["preset"].is_string()) fail("preset", "must be a string");
        cfg.preset = j["preset"].get<std::string>();
        if (*cfg.preset != kDemoPreset)
            fail("preset", "unknown preset \"" + *cfg.preset + "\" (available: \"" +
                               kDemoPreset + "\")");
        fill_preset(cfg);
    } else {
        if (!j["channel"].is_object())
            fail("channel", "must be an object with keys A, B_u, B_w, C, D_u, D_w");
        const json& ch = j["channel"];
        ChannelConfig cc;
        for (const char* key : {"A", "B_u", "B_w", "C", "D_u", "D_w"})
            if (!ch.contains(key)) fail(std::string("channel.") + key, "missing");
        cc.A = parse_matrix(ch["A"], "channel.A");
        if (cc.A.rows() != cc.A.cols()) fail("channel.A", "must be square");
        cc.B_u = parse_matrix(ch["B_u"], "channel.B_u");
        cc.B_w = parse_matrix(ch["B_w"], "channel.B_w");
        cc.C = parse_matrix(ch["C"], "channel.C");
        cc.D_u = parse_matrix(ch["D_u"], "channel.D_u");
        cc.D_w = parse_matrix(ch["D_w"], "channel.D_w");

        const Index n = cc.A.rows();
        if (cc.B_u.rows() != n) fail("channel.B_u", "row count must match A");
        if (cc.B_w.rows() != n) fail("channel.B_w", "row count must match A");
        if (cc.C.cols() != n)
            fail("channel.C", "expected " + std::to_string(cc.C.rows()) + "x" +
                                  std::to_string(n) + ", got " +
                                  std::to_string(cc.C.rows()) + "x" +
                                  std::to_string(cc.C.cols()));
        expect_shape(cc.D_u, cc.C.rows(), cc.B_u.cols(), "channel.D_u");
        expect_shape(cc.D_w, cc.C.rows(), cc.B_w.cols(), "channel.D_w");
        if (cfg.mode == Mode::kActive) {
            expect_real(cc.A, "channel.A");
            expect_real(cc.B_u, "channel.B_u");
            expect_real(cc.B_w, "channel.B_w");
            expect_real(cc.C, "channel.C");
            expect_real(cc.D_u, "channel.D_u");
            expect_real(cc.D_w, "channel.D_w");
            if (n % 2 != 0 || cc.B_u.cols() % 2 != 0 || cc.B_w.cols() % 2 != 0 ||
                cc.C.rows() % 2 != 0)
                fail("channel", "active mode requires even dimensions");
        }
        cfg.channel = cc;
        const Index nu = cc.B_u.cols();
        cfg.R1 = ComplexMatrix::Identity(nu, nu);
        cfg.R2 = ComplexMatrix::Identity(nu, nu);
    }

    if (j.contains("filter")) {
        if (!j["filter"].is_object() || !j["filter"].contains("tau"))
            fail("filter", "must be an object with key \"tau\"");
        if (!j["filter"]["tau"].is_number()) fail("filter.tau", "must be a number");
        cfg.tau = j["filter"]["tau"].get<double>();
        if (!(cfg.tau > 0.0)) fail("filter.tau", "must be positive");
    }

    if (j.contains("weights")) {
        const json& w = j["weights"];
        if (!w.is_object()) fail("weights", "must be an object");
        if (w.contains("R1")) cfg.R1 = parse_matrix(w["R1"], "weights.R1");
        if (w.contains("R2")) cfg.R2 = parse_matrix(w["R2"], "weights.R2");
        if (w.contains("mu")) {
            if (!w["mu"].is_number()) fail("weights.mu", "must be a number");
            cfg.mu = w["mu"].get<double>();
            if (!(cfg.mu > 0.0)) fail("weights.mu", "must be positive");
        }
        const Index nu = signal_width(cfg);
        expect_shape(cfg.R1, nu, nu, "weights.R1");
        expect_shape(cfg.R2, nu, nu, "weights.R2");
    }

    if (j.contains("psd")) {
        const json& p = j["psd"];
        if (!p.is_object()) fail("psd", "must be an object");
        if (p.contains("omega_min")) {
            if (!p["omega_min"].is_number()) fail("psd.omega_min", "must be a number");
            cfg.psd.omega_min = p["omega_min"].get<double>();
        }
        if (p.contains("omega_max")) {
            if (!p["omega_max"].is_number()) fail("psd.omega_max", "must be a number");
            cfg.psd.omega_max = p["omega_max"].get<double>();
        }
        if (p.contains("points")) {
            if (!p["points"].is_number_integer()) fail("psd.points", "must be an integer");
            cfg.psd.points = p["points"].get<Index>();
        }
        if (!(cfg.psd.omega_min > 0.0) || !(cfg.psd.omega_max > cfg.psd.omega_min))
            fail("psd", "requires 0 < omega_min < omega_max");
        if (cfg.psd.points < 2) fail("psd.points", "need at least 2 points");
    }

    if (j.contains("out")) {
        if (!j["out"].is_string()) fail("out", "must be a string path");
        cfg.out_dir = j["out"].get<std::string>();
    }
    return cfg;
}

std::string echo_config(const ProblemConfig& cfg) {
    json j;
    j["mode"] = cfg.mode == Mode::kPassive ? "passive" : "active";
    if (cfg.preset) {
        j["preset"] = *cfg.preset;
    } else {
        json ch;
        ch["A"] = matrix_to_json(cfg.channel->A);
        ch["B_u"] = matrix_to_json(cfg.channel->B_u);
        ch["B_w"] = matrix_to_json(cfg.channel->B_w);
        ch["C"] = matrix_to_json(cfg.channel->C);
        ch["D_u"] = matrix_to_json(cfg.channel->D_u);
        ch["D_w"] = matrix_to_json(cfg.channel->D_w);
        j["channel"] = ch;
    }
    j["filter"]["tau"] = cfg.tau;
    j["weights"]["R1"] = matrix_to_json(cfg.R1);
    j["weights"]["R2"] = matrix_to_json(cfg.R2);
    j["weights"]["mu"] = cfg.mu;
    j["psd"]["omega_min"] = cfg.psd.omega_min;
    j["psd"]["omega_max"] = cfg.psd.omega_max;
    j["psd"]["points"] = cfg.psd.points;
    if (!cfg.out_dir.empty()) j["out"] = cfg.out_dir;
    return j.dump(2) + "\n";
}

}  // namespace qeq
