#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linear_plant.hpp"
#include "mintime.hpp"
#include "riccati.hpp"
#include "synth2d.hpp"
#include "trajectory.hpp"

namespace optreg {

enum class ControlLaw {
    None,         // open loop, f = 0
    LqrSaturated, // f = clamp(-G x)
    BangReplay,   // f(t) from a stored shooting result, zero past its horizon
    Synth2d       // second-order switching-curve feedback
};

/// A control law plus the payload it needs. force_bounds, when set, states
/// what the law was designed for and must match the plant at simulation
/// time; saturation always clamps to the plant's own bounds.
struct Controller {
    ControlLaw law = ControlLaw::None;
    std::string label = "none";
    RiccatiSolution lqr;
    ShootingResult replay;
    Synthesis2D synth;
    VectorXd force_bounds;

    static Controller none() { return Controller{}; }

    static Controller lqr_saturated(RiccatiSolution sol, std::string label = "lqr") {
        Controller c;
        c.law = ControlLaw::LqrSaturated;
        c.label = std::move(label);
        c.lqr = std::move(sol);
        return c;
    }

    static Controller bang_replay(ShootingResult result, std::string label = "bang") {
        Controller c;
        c.law = ControlLaw::BangReplay;
        c.label = std::move(label);
        c.replay = std::move(result);
        return c;
    }

    static Controller synth2d(Synthesis2D synth, std::string label = "synth2d") {
        Controller c;
        c.law = ControlLaw::Synth2d;
        c.label = std::move(label);
        c.synth = std::move(synth);
        return c;
    }
};

namespace detail {

inline VectorXd clamp_to(const VectorXd& f, const VectorXd& bounds) {
    VectorXd out = f;
    for (int i = 0; i < out.size(); ++i) {
        double b = bounds[i];
        if (std::isfinite(b)) out[i] = std::min(b, std::max(-b, out[i]));
    }
    return out;
}

} // namespace detail

/// Fixed-step RK4 integration of the saturated closed loop. Feedback laws
/// are re-evaluated (and re-clamped) at the internal stages, so smooth
/// closed loops keep the full fourth-order accuracy; a replayed bang control
/// is held over each source step, matching how it was generated. If the
/// state goes non-finite the finite prefix is returned with `diverged` set.
inline Trajectory simulate(const LinearPlant& plant, const Controller& controller,
                           double horizon, double dt, int norm_dims = 0) {
    plant.validate();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidArgument("dt must be positive and finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw InvalidArgument("horizon must be positive and finite");
    if (dt > horizon / 10.0)
        throw InvalidArgument("dt must be at most horizon/10");
    const int n = plant.n_states();
    const int p = plant.n_inputs();
    if (norm_dims == 0) norm_dims = n;
    if (norm_dims < 1 || norm_dims > n)
        throw InvalidArgument("norm_dims must lie in [1, " + std::to_string(n) + "]");

    switch (controller.law) {
        case ControlLaw::None:
            break;
        case ControlLaw::LqrSaturated:
            if (controller.lqr.G.cols() != n || controller.lqr.G.rows() != p)
                throw DimensionMismatch("gain is " + std::to_string(controller.lqr.G.rows()) +
                                        "x" + std::to_string(controller.lqr.G.cols()) +
                                        ", expected " + std::to_string(p) + "x" +
                                        std::to_string(n));
            break;
        case ControlLaw::BangReplay:
            if (controller.replay.trajectory.n_samples() > 0 &&
                (controller.replay.trajectory.n_states() != n ||
                 controller.replay.trajectory.n_inputs() != p))
                throw DimensionMismatch("replayed trajectory does not match the plant dimensions");
            break;
        case ControlLaw::Synth2d:
            if (n != 2 || p != 1)
                throw DimensionMismatch("second-order feedback needs 2 states and 1 input");
            break;
    }
    if (controller.force_bounds.size() > 0) {
        if (controller.force_bounds.size() != p)
            throw DimensionMismatch("controller bounds have " +
                                    std::to_string(controller.force_bounds.size()) +
                                    " entries, expected " + std::to_string(p));
        if ((controller.force_bounds - plant.force_bounds).cwiseAbs().maxCoeff() > 0.0)
            throw InvalidArgument("controller was designed for different force bounds than the plant");
    }

    const auto steps = static_cast<long>(std::llround(horizon / dt));
    if (steps < 1) throw InvalidArgument("horizon shorter than one step");

    // Control as a function of state (and sample time for the replay).
    auto state_control = [&](const VectorXd& x) -> VectorXd {
        switch (controller.law) {
            case ControlLaw::LqrSaturated:
                return detail::clamp_to(-(controller.lqr.G * x), plant.force_bounds);
            case ControlLaw::Synth2d: {
                Eigen::Vector2d y = controller.synth.system.E * Eigen::Vector2d(x[0], x[1]);
                double u = feedback2d(controller.synth.system, y);
                return detail::clamp_to(VectorXd::Constant(1, u), plant.force_bounds);
            }
            default:
                return VectorXd::Zero(p);
        }
    };
    auto replay_control = [&](double t) -> VectorXd {
        const Trajectory& rt = controller.replay.trajectory;
        if (rt.n_samples() < 2 || rt.dt <= 0.0) return VectorXd::Zero(p);
        if (t >= controller.replay.T - 1e-12) return VectorXd::Zero(p);
        auto idx = static_cast<long>(std::floor(t / rt.dt));
        idx = std::max(0L, std::min<long>(idx, rt.n_samples() - 2));
        return rt.controls.row(idx).transpose();
    };

    MatrixXd states(steps + 1, n), controls(steps + 1, p);
    VectorXd x = plant.x0;
    long recorded = 0;
    bool diverged = false;
    std::string note;

    for (long k = 0; k <= steps; ++k) {
        double t = k * dt;
        VectorXd f;
        try {
            f = controller.law == ControlLaw::BangReplay ? replay_control(t) : state_control(x);
        } catch (const OutsideStabilityRegion& e) {
            diverged = true;
            note = "left the recoverable region at t=" + std::to_string(t) + ": " + e.what();
            break;
        }
        states.row(k) = x.transpose();
        controls.row(k) = f.transpose();
        recorded = k + 1;
        if (k == steps) break;

        VectorXd x_next;
        if (controller.law == ControlLaw::BangReplay || controller.law == ControlLaw::None) {
            // Control fixed over the step.
            VectorXd k1 = plant.A * x + plant.B * f;
            VectorXd k2 = plant.A * (x + 0.5 * dt * k1) + plant.B * f;
            VectorXd k3 = plant.A * (x + 0.5 * dt * k2) + plant.B * f;
            VectorXd k4 = plant.A * (x + dt * k3) + plant.B * f;
            x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            try {
                VectorXd k1 = plant.A * x + plant.B * f;
                VectorXd x2 = x + 0.5 * dt * k1;
                VectorXd k2 = plant.A * x2 + plant.B * state_control(x2);
                VectorXd x3 = x + 0.5 * dt * k2;
                VectorXd k3 = plant.A * x3 + plant.B * state_control(x3);
                VectorXd x4 = x + dt * k3;
                VectorXd k4 = plant.A * x4 + plant.B * state_control(x4);
                x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            } catch (const OutsideStabilityRegion& e) {
                diverged = true;
                note = "left the recoverable region at t=" + std::to_string(t) + ": " + e.what();
                break;
            }
        }
        if (!x_next.allFinite()) {
            diverged = true;
            note = "state went non-finite during the step starting at t=" + std::to_string(t);
            break;
        }
        x = x_next;
    }

    Trajectory traj;
    traj.dt = dt;
    traj.times = VectorXd::LinSpaced(recorded, 0.0, (recorded - 1) * dt);
    traj.states = states.topRows(recorded);
    traj.controls = controls.topRows(recorded);
    traj.norm_dims = norm_dims;
    traj.norm_series = state_norms(traj.states, norm_dims);
    traj.diverged = diverged;
    traj.note = note;
    return traj;
}

/// First time the displacement norm falls to `fraction` of its initial
/// value and stays there for the rest of the record; linear interpolation
/// between the straddling samples. std::nullopt when it never settles (or
/// the record is diverged/truncated).
inline std::optional<double> settling_time(const Trajectory& traj, double fraction = 0.02) {
    if (traj.n_samples() == 0)
        throw EmptyTrajectory("settling time of an empty trajectory");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidArgument("settling fraction must lie in (0, 1)");
    double norm0 = traj.norm_series[0];
    if (norm0 <= 0.0)
        throw InvalidArgument("initial displacement norm is zero; settling is undefined");
    if (traj.diverged) return std::nullopt;

    const double thr = fraction * norm0;
    int last_above = -1;
    for (int k = 0; k < traj.n_samples(); ++k)
        if (traj.norm_series[k] > thr) last_above = k;
    if (last_above < 0) return 0.0; // already inside the band at t = 0
    if (last_above == traj.n_samples() - 1) return std::nullopt;

    double n0 = traj.norm_series[last_above], n1 = traj.norm_series[last_above + 1];
    double t0 = traj.times[last_above], t1 = traj.times[last_above + 1];
    double frac = n0 - n1 != 0.0 ? (n0 - thr) / (n0 - n1) : 1.0;
    return t0 + frac * (t1 - t0);
}

/// Per-actuator peak force magnitude over the record.
inline VectorXd max_control(const Trajectory& traj) {
    if (traj.n_samples() == 0)
        throw EmptyTrajectory("max control of an empty trajectory");
    return traj.controls.cwiseAbs().colwise().maxCoeff().transpose();
}

struct ComparisonRow {
    std::string label;
    std::optional<double> settling;
    VectorXd max_force;
    double terminal_norm = 0.0;
    bool diverged = false;
};

struct ComparisonReport {
    double horizon = 0.0;
    double dt = 0.0;
    std::vector<ComparisonRow> rows; // in the order the controllers were given
};

/// Runs every controller on the same plant/horizon/grid and tabulates the
/// settling metrics.
inline ComparisonReport compare(const LinearPlant& plant,
                                const std::vector<Controller>& controllers, double horizon,
                                double dt, int norm_dims = 0) {
    ComparisonReport report;
    report.horizon = horizon;
    report.dt = dt;
    for (const Controller& ctrl : controllers) {
        Trajectory traj = simulate(plant, ctrl, horizon, dt, norm_dims);
        ComparisonRow row;
        row.label = ctrl.label;
        row.settling = settling_time(traj);
        row.max_force = max_control(traj);
        row.terminal_norm = traj.norm_series[traj.n_samples() - 1];
        row.diverged = traj.diverged;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace optreg
