// Command-line front end: regulator design and closed-loop studies driven by
// JSON configs, with CSV/report/manifest outputs that are byte-stable across
// reruns of the same config and seed.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optreg/io.hpp"
#include "optreg/mintime.hpp"
#include "optreg/riccati.hpp"
#include "optreg/sim.hpp"
#include "optreg/structural.hpp"
#include "optreg/synth2d.hpp"

namespace fs = std::filesystem;
using optreg::bound_token;
using optreg::g17;
using optreg::g6;
using json = nlohmann::ordered_json;

namespace {

struct Cli {
    std::string config_path;
    std::vector<double> rho;
    std::vector<std::string> bound;
    std::optional<double> horizon;
    std::optional<double> dt;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> norm_dims;
    std::optional<int> tau_steps;
    std::optional<int> max_iterations;
    std::optional<int> restarts;
    std::optional<std::string> controller;
};

double parse_bound_token(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (...) {
    }
    throw optreg::InvalidArgument("bound must be a number or \"inf\", got \"" + s + "\"");
}

optreg::RunConfig resolve_config(const std::string& command, const Cli& cli) {
    optreg::RunConfig cfg = optreg::load_run_config(cli.config_path);
    cfg.command = command;
    if (!cli.rho.empty()) cfg.rho_list = cli.rho;
    if (!cli.bound.empty()) {
        cfg.bound_list.clear();
        for (const auto& s : cli.bound) cfg.bound_list.push_back(parse_bound_token(s));
    }
    if (cli.horizon) cfg.horizon = *cli.horizon;
    if (cli.dt) cfg.dt = *cli.dt;
    if (cli.seed) cfg.seed = *cli.seed;
    if (cli.out_dir) cfg.out_dir = *cli.out_dir;
    if (cli.norm_dims) cfg.norm_dims = *cli.norm_dims;
    if (cli.tau_steps) cfg.tau_steps = *cli.tau_steps;
    if (cli.max_iterations) cfg.max_iterations = *cli.max_iterations;
    if (cli.restarts) cfg.restarts = *cli.restarts;
    if (cli.controller) cfg.controller = *cli.controller;
    for (double r : cfg.rho_list)
        if (!(r > 0.0)) throw optreg::InvalidArgument("rho values must be positive");
    for (double b : cfg.bound_list)
        if (!(b > 0.0)) throw optreg::InvalidArgument("bound values must be positive");
    if (cfg.model.is_null())
        throw optreg::InvalidArgument("config needs a \"model\" object or \"model_path\"");
    return cfg;
}

// Apply a uniform bound token to every actuator.
optreg::LinearPlant with_bound(const optreg::LinearPlant& plant, double bound) {
    optreg::LinearPlant p = plant;
    p.force_bounds.setConstant(bound);
    return p;
}

struct OutputSet {
    fs::path dir;
    json manifest;
    std::vector<std::string> files;

    explicit OutputSet(const optreg::RunConfig& cfg) : dir(cfg.out_dir) {
        fs::create_directories(dir);
        manifest["command"] = cfg.command;
        json jc;
        jc["horizon"] = cfg.horizon;
        jc["dt"] = cfg.dt;
        jc["seed"] = cfg.seed;
        jc["rho"] = cfg.rho_list;
        json jb = json::array();
        for (double b : cfg.bound_list) {
            if (std::isfinite(b))
                jb.push_back(b);
            else
                jb.push_back("inf");
        }
        jc["bound"] = jb;
        jc["norm_dims"] = cfg.norm_dims;
        jc["tau_steps"] = cfg.tau_steps;
        jc["max_iterations"] = cfg.max_iterations;
        jc["restarts"] = cfg.restarts;
        jc["terminal_tolerance"] = cfg.terminal_tolerance;
        manifest["config"] = jc;
    }

    void add_file(const std::string& name, const std::string& content) {
        optreg::write_text_file((dir / name).string(), content);
        files.push_back(name);
    }

    void finish(const std::string& report) {
        add_file("report.txt", report);
        manifest["outputs"] = files;
        manifest["outputs"].push_back("manifest.json");
        optreg::write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    }
};

std::string describe_plant(const optreg::LoadedModel& model) {
    std::string s = std::to_string(model.plant.n_states()) + " states, " +
                    std::to_string(model.plant.n_inputs()) + " input" +
                    (model.plant.n_inputs() == 1 ? "" : "s");
    if (model.modal) {
        s += " (modal: ";
        for (int i = 0; i < model.modal->n_kept(); ++i) {
            if (i) s += ", ";
            s += "w" + std::to_string(i + 1) + "=" + g6(model.modal->frequencies[i]);
        }
        s += " rad/s)";
    }
    return s;
}

json plant_json(const optreg::LoadedModel& model) {
    json j;
    j["n_states"] = model.plant.n_states();
    j["n_inputs"] = model.plant.n_inputs();
    json jb = json::array();
    for (int i = 0; i < model.plant.force_bounds.size(); ++i) {
        double b = model.plant.force_bounds[i];
        if (std::isfinite(b))
            jb.push_back(b);
        else
            jb.push_back("inf");
    }
    j["force_bounds"] = jb;
    if (model.modal) {
        j["modal_frequencies"] = std::vector<double>(
            model.modal->frequencies.data(),
            model.modal->frequencies.data() + model.modal->frequencies.size());
        j["modal_damping"] = std::vector<double>(
            model.modal->damping_ratios.data(),
            model.modal->damping_ratios.data() + model.modal->damping_ratios.size());
    }
    return j;
}

std::string settling_text(const std::optional<double>& s) {
    return s ? g6(*s) : "not settled";
}

json settling_json(const std::optional<double>& s) {
    if (s) return json(*s);
    return json(nullptr);
}

std::string rho_tag(double rho) { return g17(rho); }

// Shared by compare and the report of lqr: one table of per-controller rows,
// sorted by settling time (unsettled rows last, ties by label).
std::string comparison_table(const optreg::ComparisonReport& report) {
    std::vector<const optreg::ComparisonRow*> rows;
    for (const auto& r : report.rows) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const optreg::ComparisonRow* a, const optreg::ComparisonRow* b) {
                         double sa = a->settling ? *a->settling
                                                 : std::numeric_limits<double>::infinity();
                         double sb = b->settling ? *b->settling
                                                 : std::numeric_limits<double>::infinity();
                         if (sa != sb) return sa < sb;
                         return a->label < b->label;
                     });
    std::ostringstream os;
    os << "controller          settling [s]    max|f|          terminal norm\n";
    for (const auto* r : rows) {
        char line[160];
        std::string maxf;
        for (int i = 0; i < r->max_force.size(); ++i) {
            if (i) maxf += "/";
            maxf += g6(r->max_force[i]);
        }
        std::snprintf(line, sizeof line, "%-19s %-15s %-15s %s%s\n", r->label.c_str(),
                      settling_text(r->settling).c_str(), maxf.c_str(),
                      g6(r->terminal_norm).c_str(), r->diverged ? "  [diverged]" : "");
        os << line;
    }
    return os.str();
}

json comparison_json(const optreg::ComparisonReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json jr;
        jr["label"] = r.label;
        jr["settling"] = settling_json(r.settling);
        jr["max_force"] =
            std::vector<double>(r.max_force.data(), r.max_force.data() + r.max_force.size());
        jr["terminal_norm"] = r.terminal_norm;
        jr["diverged"] = r.diverged;
        rows.push_back(jr);
    }
    return rows;
}

// ---------------------------------------------------------------------------

int run_lqr(const optreg::RunConfig& cfg) {
    optreg::LoadedModel model = optreg::load_model(cfg.model);
    optreg::LinearPlant plant = cfg.bound_list.empty() ? model.plant
                                                       : with_bound(model.plant, cfg.bound_list[0]);
    OutputSet out(cfg);
    out.manifest["plant"] = plant_json(model);

    std::vector<optreg::Controller> controllers;
    json results = json::array();
    for (double rho : cfg.rho_list) {
        optreg::LqrWeights w;
        w.rho = rho;
        optreg::RiccatiSolution sol = optreg::solve_care(plant, w);
        out.add_file("gain_rho" + rho_tag(rho) + ".csv", optreg::matrix_csv(sol.G));
        json jr;
        jr["rho"] = rho;
        jr["residual_norm"] = sol.residual_norm;
        results.push_back(jr);
        controllers.push_back(
            optreg::Controller::lqr_saturated(std::move(sol), "lqr(rho=" + g6(rho) + ")"));
    }
    optreg::ComparisonReport report =
        optreg::compare(plant, controllers, cfg.horizon, cfg.dt, cfg.norm_dims);
    for (std::size_t i = 0; i < controllers.size(); ++i) {
        optreg::Trajectory traj =
            optreg::simulate(plant, controllers[i], cfg.horizon, cfg.dt, cfg.norm_dims);
        out.add_file("traj_lqr_rho" + rho_tag(cfg.rho_list[i]) + ".csv",
                     optreg::trajectory_csv(traj));
        results[i]["settling"] = settling_json(report.rows[i].settling);
        results[i]["max_force"] = std::vector<double>(
            report.rows[i].max_force.data(),
            report.rows[i].max_force.data() + report.rows[i].max_force.size());
    }
    out.manifest["results"] = results;

    std::ostringstream rep;
    rep << "saturated quadratic regulator\n"
        << "plant: " << describe_plant(model) << "\n"
        << "horizon: " << g6(cfg.horizon) << " s, dt: " << g6(cfg.dt)
        << " s, bound: " << (cfg.bound_list.empty() ? "model" : bound_token(cfg.bound_list[0]))
        << "\n\n"
        << comparison_table(report);
    for (const auto& wmsg : model.modal ? model.modal->warnings : std::vector<std::string>{})
        rep << "warning: " << wmsg << "\n";
    out.finish(rep.str());
    return 0;
}

int run_mintime(const optreg::RunConfig& cfg) {
    optreg::LoadedModel model = optreg::load_model(cfg.model);
    optreg::LinearPlant plant = cfg.bound_list.empty() ? model.plant
                                                       : with_bound(model.plant, cfg.bound_list[0]);
    optreg::ShootingConfig sc;
    sc.tau_steps = cfg.tau_steps;
    sc.max_iterations = cfg.max_iterations;
    sc.restarts = cfg.restarts;
    sc.terminal_tolerance = cfg.terminal_tolerance;
    sc.seed = cfg.seed;
    optreg::ShootingResult res = optreg::shoot(plant, sc);

    OutputSet out(cfg);
    out.manifest["plant"] = plant_json(model);
    out.add_file("traj_bang.csv", optreg::trajectory_csv(res.trajectory));
    {
        std::ostringstream sw;
        sw << "t";
        for (int i = 1; i <= plant.n_inputs(); ++i) sw << ",s" << i;
        sw << "\n";
        for (int k = 0; k < res.switching.rows(); ++k) {
            sw << g17(res.trajectory.times[k]);
            for (int i = 0; i < res.switching.cols(); ++i) sw << ',' << g17(res.switching(k, i));
            sw << '\n';
        }
        out.add_file("switching.csv", sw.str());
    }

    auto switches = optreg::switch_times(res);
    json jr;
    jr["T"] = res.T;
    jr["c"] = res.c;
    jr["terminal_penalty"] = res.terminal_penalty;
    jr["converged"] = res.converged;
    jr["status"] = res.status;
    jr["evaluations"] = res.evaluations;
    jr["lambda0"] =
        std::vector<double>(res.lambda0.data(), res.lambda0.data() + res.lambda0.size());
    json jsw = json::array();
    for (const auto& v : switches) jsw.push_back(v);
    jr["switch_times"] = jsw;
    out.manifest["results"] = jr;

    std::ostringstream rep;
    rep << "minimum-time bang-bang regulator\n"
        << "plant: " << describe_plant(model) << "\n"
        << "status: " << res.status << "\n"
        << "T: " << g17(res.T) << " s\n"
        << "terminal penalty: " << g17(res.terminal_penalty) << "\n";
    for (std::size_t i = 0; i < switches.size(); ++i) {
        rep << "switch times f" << i + 1 << ":";
        if (switches[i].empty()) rep << " (none)";
        for (double t : switches[i]) rep << " " << g6(t);
        rep << "\n";
    }
    out.finish(rep.str());

    if (!res.converged) {
        std::cerr << "error: shooting did not converge (" << res.status << ")\n";
        return 3;
    }
    return 0;
}

int run_simulate(const optreg::RunConfig& cfg) {
    optreg::LoadedModel model = optreg::load_model(cfg.model);
    optreg::LinearPlant plant = cfg.bound_list.empty() ? model.plant
                                                       : with_bound(model.plant, cfg.bound_list[0]);
    optreg::Controller ctrl;
    if (cfg.controller == "none") {
        ctrl = optreg::Controller::none();
    } else if (cfg.controller == "lqr") {
        optreg::LqrWeights w;
        w.rho = cfg.rho_list[0];
        ctrl = optreg::Controller::lqr_saturated(optreg::solve_care(plant, w),
                                                 "lqr(rho=" + g6(cfg.rho_list[0]) + ")");
    } else if (cfg.controller == "bang") {
        optreg::ShootingConfig sc;
        sc.tau_steps = cfg.tau_steps;
        sc.max_iterations = cfg.max_iterations;
        sc.restarts = cfg.restarts;
        sc.terminal_tolerance = cfg.terminal_tolerance;
        sc.seed = cfg.seed;
        ctrl = optreg::Controller::bang_replay(optreg::shoot(plant, sc));
    } else if (cfg.controller == "synth2d") {
        ctrl = optreg::Controller::synth2d(optreg::synthesize(plant));
    } else {
        throw optreg::InvalidArgument("unknown controller \"" + cfg.controller +
                                      "\" (none, lqr, bang, synth2d)");
    }

    optreg::Trajectory traj = optreg::simulate(plant, ctrl, cfg.horizon, cfg.dt, cfg.norm_dims);
    OutputSet out(cfg);
    out.manifest["plant"] = plant_json(model);
    out.add_file("traj_" + ctrl.label.substr(0, ctrl.label.find('(')) + ".csv",
                 optreg::trajectory_csv(traj));

    std::optional<double> settling = optreg::settling_time(traj);
    json jr;
    jr["controller"] = ctrl.label;
    jr["settling"] = settling_json(settling);
    optreg::VectorXd mf = optreg::max_control(traj);
    jr["max_force"] = std::vector<double>(mf.data(), mf.data() + mf.size());
    jr["terminal_norm"] = traj.norm_series[traj.n_samples() - 1];
    jr["diverged"] = traj.diverged;
    if (!traj.note.empty()) jr["note"] = traj.note;
    out.manifest["results"] = jr;

    std::ostringstream rep;
    rep << "closed-loop simulation\n"
        << "plant: " << describe_plant(model) << "\n"
        << "controller: " << ctrl.label << "\n"
        << "settling: " << settling_text(settling) << " s\n"
        << "terminal norm: " << g6(traj.norm_series[traj.n_samples() - 1]) << "\n";
    if (traj.diverged) rep << "diverged: " << traj.note << "\n";
    out.finish(rep.str());
    return 0;
}

int run_compare(const optreg::RunConfig& cfg) {
    optreg::LoadedModel model = optreg::load_model(cfg.model);
    optreg::LinearPlant plant = cfg.bound_list.empty() ? model.plant
                                                       : with_bound(model.plant, cfg.bound_list[0]);
    if (!plant.bounded())
        throw optreg::InvalidArgument(
            "compare needs finite force bounds (set \"bound\" or the model's force_bounds)");

    optreg::ShootingConfig sc;
    sc.tau_steps = cfg.tau_steps;
    sc.max_iterations = cfg.max_iterations;
    sc.restarts = cfg.restarts;
    sc.terminal_tolerance = cfg.terminal_tolerance;
    sc.seed = cfg.seed;
    optreg::ShootingResult res = optreg::shoot(plant, sc);

    std::vector<optreg::Controller> controllers;
    controllers.push_back(optreg::Controller::bang_replay(res));
    for (double rho : cfg.rho_list) {
        optreg::LqrWeights w;
        w.rho = rho;
        controllers.push_back(optreg::Controller::lqr_saturated(
            optreg::solve_care(plant, w), "lqr(rho=" + g6(rho) + ")"));
    }
    controllers.push_back(optreg::Controller::none());

    optreg::ComparisonReport report =
        optreg::compare(plant, controllers, cfg.horizon, cfg.dt, cfg.norm_dims);

    OutputSet out(cfg);
    out.manifest["plant"] = plant_json(model);
    for (std::size_t i = 0; i < controllers.size(); ++i) {
        optreg::Trajectory traj =
            optreg::simulate(plant, controllers[i], cfg.horizon, cfg.dt, cfg.norm_dims);
        std::string name = controllers[i].label;
        if (i >= 1 && i < controllers.size() - 1) name = "lqr_rho" + rho_tag(cfg.rho_list[i - 1]);
        out.add_file("traj_" + name + ".csv", optreg::trajectory_csv(traj));
    }
    json jr;
    jr["mintime_T"] = res.T;
    jr["mintime_status"] = res.status;
    jr["rows"] = comparison_json(report);
    out.manifest["results"] = jr;

    std::ostringstream rep;
    rep << "closed-loop comparison\n"
        << "plant: " << describe_plant(model) << "\n"
        << "horizon: " << g6(cfg.horizon) << " s, dt: " << g6(cfg.dt)
        << " s, bound: " << bound_token(plant.force_bounds[0]) << "\n"
        << "minimum time (bang): " << g17(res.T) << " s, status " << res.status << "\n\n"
        << comparison_table(report);
    out.finish(rep.str());

    if (!res.converged) {
        std::cerr << "error: shooting did not converge (" << res.status << ")\n";
        return 3;
    }
    return 0;
}

int run_sweep(const optreg::RunConfig& cfg) {
    optreg::LoadedModel model = optreg::load_model(cfg.model);
    if (cfg.bound_list.empty())
        throw optreg::InvalidArgument("sweep needs a \"bound\" list (\"inf\" allowed)");

    std::vector<double> rhos = cfg.rho_list;
    std::vector<double> bounds = cfg.bound_list;
    std::sort(rhos.begin(), rhos.end());
    std::sort(bounds.begin(), bounds.end());

    OutputSet out(cfg);
    out.manifest["plant"] = plant_json(model);

    std::ostringstream csv;
    csv << "rho,bound,settling,max_force,terminal_norm\n";
    json results = json::array();
    for (double rho : rhos) {
        optreg::LqrWeights w;
        w.rho = rho;
        optreg::RiccatiSolution sol = optreg::solve_care(model.plant, w);
        for (double bound : bounds) {
            optreg::LinearPlant plant = with_bound(model.plant, bound);
            optreg::Controller ctrl = optreg::Controller::lqr_saturated(sol);
            optreg::Trajectory traj =
                optreg::simulate(plant, ctrl, cfg.horizon, cfg.dt, cfg.norm_dims);
            std::optional<double> settling = optreg::settling_time(traj);
            double maxf = optreg::max_control(traj).maxCoeff();
            double term = traj.norm_series[traj.n_samples() - 1];
            csv << g17(rho) << ',' << bound_token(bound) << ','
                << (settling ? g17(*settling) : "") << ',' << g17(maxf) << ',' << g17(term)
                << '\n';
            json jr;
            jr["rho"] = rho;
            jr["bound"] = std::isfinite(bound) ? json(bound) : json("inf");
            jr["settling"] = settling_json(settling);
            jr["max_force"] = maxf;
            jr["terminal_norm"] = term;
            results.push_back(jr);
        }
    }
    out.add_file("sweep.csv", csv.str());
    out.manifest["results"] = results;

    std::ostringstream rep;
    rep << "weight/bound sweep\n"
        << "plant: " << describe_plant(model) << "\n"
        << "horizon: " << g6(cfg.horizon) << " s, dt: " << g6(cfg.dt) << " s\n"
        << "rows: " << results.size() << " (see sweep.csv)\n";
    out.finish(rep.str());
    return 0;
}

int run_synth2d(const optreg::RunConfig& cfg) {
    optreg::LoadedModel model = optreg::load_model(cfg.model);
    optreg::LinearPlant plant = cfg.bound_list.empty() ? model.plant
                                                       : with_bound(model.plant, cfg.bound_list[0]);
    optreg::Synthesis2D synth = optreg::synthesize(plant);
    optreg::Controller ctrl = optreg::Controller::synth2d(synth);
    optreg::Trajectory traj = optreg::simulate(plant, ctrl, cfg.horizon, cfg.dt, cfg.norm_dims);

    // Curve span: cover what the trajectory visited (in canonical
    // coordinates), with margin.
    double span = 1e-6;
    for (int k = 0; k < traj.n_samples(); ++k) {
        Eigen::Vector2d y = synth.system.E * Eigen::Vector2d(traj.states(k, 0), traj.states(k, 1));
        span = std::max(span, std::abs(y[0]));
    }
    span *= 1.2;
    auto curve = optreg::switching_curve_samples(synth.system, cfg.curve_samples, span);

    OutputSet out(cfg);
    out.manifest["plant"] = plant_json(model);
    out.add_file("traj_synth2d.csv", optreg::trajectory_csv(traj));
    {
        std::ostringstream cs;
        cs << "y1,y2\n";
        for (const auto& [y1, y2] : curve) cs << g17(y1) << ',' << g17(y2) << '\n';
        out.add_file("switching_curve.csv", cs.str());
    }

    std::optional<double> settling = optreg::settling_time(traj);
    json jr;
    jr["lambda"] = {synth.system.lambda1, synth.system.lambda2};
    jr["b"] = {synth.system.b1, synth.system.b2};
    jr["xi"] = synth.system.xi;
    jr["cond_E"] = synth.system.cond_E;
    jr["instability_region"] = synth.region.describe();
    jr["settling"] = settling_json(settling);
    jr["diverged"] = traj.diverged;
    out.manifest["results"] = jr;

    std::ostringstream rep;
    rep << "second-order switching-curve synthesis\n"
        << "plant: " << describe_plant(model) << "\n"
        << "eigenvalues: " << g17(synth.system.lambda1) << ", " << g17(synth.system.lambda2)
        << "\n"
        << "input map b: " << g17(synth.system.b1) << ", " << g17(synth.system.b2) << "\n"
        << "bound xi: " << g17(synth.system.xi) << "\n"
        << "transform condition: " << g6(synth.system.cond_E) << "\n"
        << "unrecoverable region: " << synth.region.describe() << "\n"
        << "settling: " << settling_text(settling) << " s\n";
    if (traj.diverged) rep << "diverged: " << traj.note << "\n";
    out.finish(rep.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bounded-force regulator design: minimum-time bang-bang synthesis, "
                 "saturated quadratic regulators, and closed-loop studies"};
    app.require_subcommand(1);

    Cli cli;
    std::map<std::string, int (*)(const optreg::RunConfig&)> runners = {
        {"lqr", run_lqr},         {"mintime", run_mintime}, {"simulate", run_simulate},
        {"compare", run_compare}, {"sweep", run_sweep},     {"synth2d", run_synth2d},
    };
    const std::map<std::string, std::string> blurbs = {
        {"lqr", "solve the Riccati gain(s) and simulate the saturated loop"},
        {"mintime", "penalty-shooting minimum-time bang-bang regulator"},
        {"simulate", "integrate one closed loop chosen by \"controller\""},
        {"compare", "bang-bang vs saturated quadratic regulators vs open loop"},
        {"sweep", "settling/force table over rho and bound grids"},
        {"synth2d", "closed-form switching-curve feedback for 2-state plants"},
    };

    std::string chosen;
    for (const auto& [name, fn] : runners) {
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        sub->add_option("config", cli.config_path, "JSON config file")->required();
        sub->add_option("--rho", cli.rho, "state/control weight ratio(s)");
        sub->add_option("--bound", cli.bound, "force bound(s), \"inf\" for unbounded");
        sub->add_option("--horizon", cli.horizon, "simulation horizon [s]");
        sub->add_option("--dt", cli.dt, "integration step [s]");
        sub->add_option("--seed", cli.seed, "random seed for the shooting search");
        sub->add_option("--out", cli.out_dir, "output directory");
        sub->add_option("--norm-dims", cli.norm_dims, "leading states in the settling norm");
        sub->add_option("--tau-steps", cli.tau_steps, "shooting grid steps");
        sub->add_option("--max-iterations", cli.max_iterations, "shooting evaluation budget");
        sub->add_option("--restarts", cli.restarts, "shooting multi-start count");
        sub->add_option("--controller", cli.controller, "simulate: none|lqr|bang|synth2d");
        sub->callback([&chosen, name = name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        optreg::RunConfig cfg = resolve_config(chosen, cli);
        return runners.at(chosen)(cfg);
    } catch (const optreg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const optreg::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
