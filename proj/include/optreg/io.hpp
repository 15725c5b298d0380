#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "linear_plant.hpp"
#include "structural.hpp"
#include "trajectory.hpp"

namespace optreg {

using nlohmann::json;

/// Shortest exact decimal form, used for every CSV field so reruns are
/// byte-identical.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// JSON helpers. Every error message names the offending field.

namespace detail_io {

inline double number_field(const json& j, const std::string& name, bool allow_inf = false) {
    if (j.is_number()) return j.get<double>();
    if (allow_inf && j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw InvalidArgument(name + " must be a number" + (allow_inf ? " or \"inf\"" : ""));
}

} // namespace detail_io

inline MatrixXd parse_matrix(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty())
        throw InvalidArgument(name + " must be a non-empty array of rows");
    const auto rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        throw InvalidArgument(name + ": row 0 must be a non-empty array");
    const auto cols = j[0].size();
    MatrixXd M(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array())
            throw InvalidArgument(name + ": row " + std::to_string(r) + " must be an array");
        if (j[r].size() != cols)
            throw InvalidArgument(name + ": row " + std::to_string(r) + " has " +
                                  std::to_string(j[r].size()) + " entries, expected " +
                                  std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c)
            M(r, c) = detail_io::number_field(j[r][c], name + "[" + std::to_string(r) + "][" +
                                                           std::to_string(c) + "]");
    }
    return M;
}

inline VectorXd parse_vector(const json& j, const std::string& name, bool allow_inf = false) {
    if (!j.is_array())
        throw InvalidArgument(name + " must be an array");
    VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[i] = detail_io::number_field(j[i], name + "[" + std::to_string(i) + "]", allow_inf);
    return v;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
    return j;
}

/// A model file plus whatever structural context it came with, so the CLI
/// can report modal data when there is any.
struct LoadedModel {
    LinearPlant plant;
    std::optional<StructuralModel> structure;
    std::optional<ModalData> modal;
};

/// Builds a plant from a model object. Two shapes are accepted:
/// state-space ("A", "B", optional "force_bounds", "x0") and structural
/// ("M", "K", "D", one of "E"/"zeta", optional "n_modes", "x0" physical or
/// "x0_modal"). Bounds default to unbounded actuators.
inline LoadedModel load_model(const json& j) {
    if (!j.is_object())
        throw InvalidArgument("model must be a JSON object");
    LoadedModel out;
    if (j.contains("A")) {
        MatrixXd A = parse_matrix(j.at("A"), "A");
        if (!j.contains("B")) throw InvalidArgument("model with A needs B");
        MatrixXd B = parse_matrix(j.at("B"), "B");
        VectorXd bounds = j.contains("force_bounds")
                              ? parse_vector(j.at("force_bounds"), "force_bounds", true)
                              : VectorXd::Constant(B.cols(),
                                                   std::numeric_limits<double>::infinity());
        if (!j.contains("x0")) throw InvalidArgument("model needs x0");
        VectorXd x0 = parse_vector(j.at("x0"), "x0");
        out.plant = LinearPlant::make(std::move(A), std::move(B), std::move(bounds),
                                      std::move(x0));
        return out;
    }
    if (!j.contains("M"))
        throw InvalidArgument("model needs either A/B (state space) or M/K/D (structural)");

    StructuralModel model;
    model.M = parse_matrix(j.at("M"), "M");
    if (!j.contains("K")) throw InvalidArgument("structural model needs K");
    model.K = parse_matrix(j.at("K"), "K");
    if (!j.contains("D")) throw InvalidArgument("structural model needs D");
    model.D = parse_matrix(j.at("D"), "D");
    if (j.contains("E")) model.E = parse_matrix(j.at("E"), "E");
    if (j.contains("zeta")) model.modal_damping = parse_vector(j.at("zeta"), "zeta");
    if (j.contains("n_modes")) {
        if (!j.at("n_modes").is_number_integer())
            throw InvalidArgument("n_modes must be an integer");
        model.n_modes = j.at("n_modes").get<int>();
    }
    model.validate();

    ModalData modal = modal_decompose(model);
    const int p = static_cast<int>(model.D.cols());
    VectorXd bounds = j.contains("force_bounds")
                          ? parse_vector(j.at("force_bounds"), "force_bounds", true)
                          : VectorXd::Constant(p, std::numeric_limits<double>::infinity());

    if (j.contains("x0_modal")) {
        VectorXd eta0 = parse_vector(j.at("x0_modal"), "x0_modal");
        out.plant = to_state_space(model, modal, eta0, bounds);
    } else if (j.contains("x0")) {
        VectorXd u0 = parse_vector(j.at("x0"), "x0");
        out.plant = to_state_space_physical(model, modal, u0, bounds);
    } else {
        throw InvalidArgument("structural model needs x0 (physical) or x0_modal");
    }
    out.structure = std::move(model);
    out.modal = std::move(modal);
    return out;
}

/// Resolved run request: the model plus every knob the CLI accepts, after
/// config-file values and command-line overrides have been merged.
struct RunConfig {
    std::string command;
    json model;                    // inline object, or {"path": ...} resolved by the caller
    std::vector<double> rho_list = {1.0};
    std::vector<double> bound_list; // empty => keep the model's own bounds
    double horizon = 100.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int norm_dims = 0; // 0 => full state
    // minimum-time knobs
    int tau_steps = 2000;
    int max_iterations = 5000;
    int restarts = 16;
    double terminal_tolerance = 1e-6;
    // simulate's controller pick, synth2d curve sampling
    std::string controller = "none";
    int curve_samples = 512;
};

/// Reads a config file. Unknown keys are rejected so typos surface early.
inline RunConfig load_run_config(const std::string& path) {
    json j = load_json_file(path);
    if (!j.is_object())
        throw InvalidArgument(path + ": config must be a JSON object");
    RunConfig cfg;
    static const std::vector<std::string> known = {
        "command",    "model",         "model_path",  "rho",       "bound",
        "horizon",    "dt",            "seed",        "out",       "norm_dims",
        "tau_steps",  "max_iterations", "restarts",   "terminal_tolerance",
        "controller", "curve_samples"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known) ok = ok || k == it.key();
        if (!ok) throw InvalidArgument(path + ": unknown config key \"" + it.key() + "\"");
    }
    if (j.contains("command")) cfg.command = j.at("command").get<std::string>();
    if (j.contains("model")) {
        cfg.model = j.at("model");
    } else if (j.contains("model_path")) {
        std::string mp = j.at("model_path").get<std::string>();
        // Relative to the config file's directory.
        auto slash = path.find_last_of('/');
        if (slash != std::string::npos && !mp.empty() && mp[0] != '/')
            mp = path.substr(0, slash + 1) + mp;
        cfg.model = load_json_file(mp);
    }
    if (j.contains("rho")) {
        cfg.rho_list.clear();
        for (const auto& r : j.at("rho")) cfg.rho_list.push_back(detail_io::number_field(r, "rho"));
        if (cfg.rho_list.empty()) throw InvalidArgument("rho list must not be empty");
    }
    if (j.contains("bound"))
        for (const auto& b : j.at("bound"))
            cfg.bound_list.push_back(detail_io::number_field(b, "bound", true));
    if (j.contains("horizon")) cfg.horizon = detail_io::number_field(j.at("horizon"), "horizon");
    if (j.contains("dt")) cfg.dt = detail_io::number_field(j.at("dt"), "dt");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("norm_dims")) cfg.norm_dims = j.at("norm_dims").get<int>();
    if (j.contains("tau_steps")) cfg.tau_steps = j.at("tau_steps").get<int>();
    if (j.contains("max_iterations")) cfg.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    if (j.contains("terminal_tolerance"))
        cfg.terminal_tolerance = detail_io::number_field(j.at("terminal_tolerance"),
                                                         "terminal_tolerance");
    if (j.contains("controller")) cfg.controller = j.at("controller").get<std::string>();
    if (j.contains("curve_samples")) cfg.curve_samples = j.at("curve_samples").get<int>();
    return cfg;
}

// ---------------------------------------------------------------------------
// Writers. LF line endings, no timestamps, %.17g everywhere.

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidArgument("cannot write " + path);
    out << content;
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t";
    for (int i = 1; i <= traj.n_states(); ++i) os << ",x" << i;
    for (int i = 1; i <= traj.n_inputs(); ++i) os << ",f" << i;
    os << ",norm\n";
    for (int k = 0; k < traj.n_samples(); ++k) {
        os << g17(traj.times[k]);
        for (int i = 0; i < traj.n_states(); ++i) os << ',' << g17(traj.states(k, i));
        for (int i = 0; i < traj.n_inputs(); ++i) os << ',' << g17(traj.controls(k, i));
        os << ',' << g17(traj.norm_series[k]) << '\n';
    }
    return os.str();
}

inline std::string matrix_csv(const MatrixXd& M) {
    std::ostringstream os;
    for (int r = 0; r < M.rows(); ++r) {
        for (int c = 0; c < M.cols(); ++c) {
            if (c) os << ',';
            os << g17(M(r, c));
        }
        os << '\n';
    }
    return os.str();
}

/// "inf" for unbounded entries, %.17g otherwise; used in reports and file
/// name fragments.
inline std::string bound_token(double b) {
    return std::isfinite(b) ? g17(b) : "inf";
}

} // namespace optreg
