#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "optreg/mintime.hpp"
#include "optreg/riccati.hpp"
#include "optreg/sim.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using optreg::MatrixXd;
using optreg::VectorXd;

namespace {

optreg::LinearPlant oscillator(double bound) {
    MatrixXd A(2, 2), B(2, 1);
    A << 0.0, 1.0, -4.0, 0.0; // undamped, omega = 2
    B << 0.0, 1.0;
    VectorXd x0(2);
    x0 << 1.0, 0.0;
    return optreg::LinearPlant::make(A, B, VectorXd::Constant(1, bound), x0);
}

double terminal_error(const optreg::LinearPlant& plant, double dt) {
    optreg::Trajectory traj = optreg::simulate(plant, optreg::Controller::none(), 1.0, dt);
    VectorXd exact = oracles::lti_flow(plant.A, plant.x0, 1.0);
    return (traj.states.row(traj.n_samples() - 1).transpose() - exact).norm();
}

} // namespace

TEST_CASE("open-loop integration is fourth order", "[sim]") {
    optreg::LinearPlant plant = oscillator(std::numeric_limits<double>::infinity());
    double e1 = terminal_error(plant, 0.01);
    double e2 = terminal_error(plant, 0.005);
    REQUIRE(e1 > 0.0);
    double ratio = e1 / e2;
    REQUIRE(ratio > 10.0);
    REQUIRE(ratio < 24.0);

    // And against a plain-loop reference of the same scheme the states agree
    // to roundoff.
    optreg::Trajectory traj = optreg::simulate(plant, optreg::Controller::none(), 1.0, 0.01);
    VectorXd ref = oracles::rk4_free(plant.A, plant.x0, 0.01, 100);
    REQUIRE((traj.states.row(traj.n_samples() - 1).transpose() - ref).norm() < 1e-13);
}

TEST_CASE("smooth feedback keeps fourth-order accuracy through the stages", "[sim]") {
    optreg::LinearPlant plant = oscillator(std::numeric_limits<double>::infinity());
    optreg::RiccatiSolution sol = optreg::solve_care(plant);
    optreg::Controller ctrl = optreg::Controller::lqr_saturated(sol);
    MatrixXd Acl = plant.A - plant.B * sol.G;

    auto err = [&](double dt) {
        optreg::Trajectory traj = optreg::simulate(plant, ctrl, 1.0, dt);
        VectorXd exact = oracles::lti_flow(Acl, plant.x0, 1.0);
        return (traj.states.row(traj.n_samples() - 1).transpose() - exact).norm();
    };
    double ratio = err(0.01) / err(0.005);
    REQUIRE(ratio > 10.0);
    REQUIRE(ratio < 24.0);
}

TEST_CASE("undamped modal energy is conserved over long horizons", "[sim]") {
    optreg::LinearPlant plant = oscillator(std::numeric_limits<double>::infinity());
    plant.x0 << 0.0, 1.0;
    optreg::Trajectory traj = optreg::simulate(plant, optreg::Controller::none(), 10.0, 1e-3);
    double e0 = 4.0 * traj.states(0, 0) * traj.states(0, 0) +
                traj.states(0, 1) * traj.states(0, 1);
    double drift = 0.0;
    for (int k = 0; k < traj.n_samples(); ++k) {
        double e = 4.0 * traj.states(k, 0) * traj.states(k, 0) +
                   traj.states(k, 1) * traj.states(k, 1);
        drift = std::max(drift, std::abs(e - e0));
    }
    REQUIRE(e0 == 1.0);
    REQUIRE(drift < 1e-6);
}

TEST_CASE("saturation clamps exactly to the plant bounds", "[sim]") {
    optreg::LinearPlant plant = helpers::siso_benchmark(1.0);
    optreg::RiccatiSolution sol = optreg::solve_care(plant, helpers::benchmark_weights(100.0));
    optreg::Trajectory traj =
        optreg::simulate(plant, optreg::Controller::lqr_saturated(sol), 20.0, 1e-3);
    VectorXd peak = optreg::max_control(traj);
    REQUIRE(peak[0] == 1.0); // the clamp writes the bound verbatim
    REQUIRE(traj.controls.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("settling time matches the scalar closed form", "[sim]") {
    MatrixXd A = -MatrixXd::Ones(1, 1);
    MatrixXd B = MatrixXd::Ones(1, 1);
    optreg::LinearPlant plant{A, B, VectorXd::Constant(1, std::numeric_limits<double>::infinity()),
                              VectorXd::Ones(1)};
    optreg::Trajectory traj = optreg::simulate(plant, optreg::Controller::none(), 10.0, 1e-3);
    auto settle = optreg::settling_time(traj);
    REQUIRE(settle.has_value());
    REQUIRE(std::abs(*settle - std::log(50.0)) < 1e-4);

    SECTION("shorter horizons do not settle") {
        optreg::Trajectory brief = optreg::simulate(plant, optreg::Controller::none(), 1.0, 1e-3);
        REQUIRE_FALSE(optreg::settling_time(brief).has_value());
    }
    SECTION("fraction knob moves the crossing") {
        auto half = optreg::settling_time(traj, 0.5);
        REQUIRE(half.has_value());
        REQUIRE(std::abs(*half - std::log(2.0)) < 1e-4);
        REQUIRE_THROWS_AS(optreg::settling_time(traj, 0.0), optreg::InvalidArgument);
        REQUIRE_THROWS_AS(optreg::settling_time(traj, 1.0), optreg::InvalidArgument);
    }
    SECTION("zero initial norm is undefined") {
        optreg::LinearPlant at_origin = plant;
        at_origin.x0 = VectorXd::Zero(1);
        optreg::Trajectory t0 = optreg::simulate(at_origin, optreg::Controller::none(), 1.0, 1e-2);
        REQUIRE_THROWS_AS(optreg::settling_time(t0), optreg::InvalidArgument);
    }
}

TEST_CASE("divergence is flagged and truncated, never thrown", "[sim]") {
    MatrixXd A = MatrixXd::Ones(1, 1);
    MatrixXd B = MatrixXd::Ones(1, 1);
    optreg::LinearPlant plant{A, B, VectorXd::Constant(1, std::numeric_limits<double>::infinity()),
                              VectorXd::Ones(1)};
    optreg::Trajectory traj = optreg::simulate(plant, optreg::Controller::none(), 800.0, 1.0);
    REQUIRE(traj.diverged);
    REQUIRE_FALSE(traj.note.empty());
    REQUIRE(traj.n_samples() < 801);
    REQUIRE(traj.states.allFinite());
    REQUIRE_FALSE(optreg::settling_time(traj).has_value());
}

TEST_CASE("replayed bang control reaches the shooting terminal ball", "[sim]") {
    optreg::LinearPlant plant = helpers::double_integrator();
    optreg::ShootingConfig sc;
    sc.seed = 3;
    optreg::ShootingResult res = optreg::shoot(plant, sc);
    REQUIRE(res.converged);

    optreg::Trajectory traj =
        optreg::simulate(plant, optreg::Controller::bang_replay(res), 3.0, 1e-3);
    REQUIRE(traj.controls(0, 0) == -1.0); // pull toward the origin first

    // Past the replay horizon the input is off.
    int k_after = static_cast<int>(std::ceil((res.T + 0.1) / 1e-3));
    REQUIRE(traj.controls(k_after, 0) == 0.0);

    // Near t = T the state is inside (a grid-step neighborhood of) the ball.
    int k_T = static_cast<int>(std::round(res.T / 1e-3));
    REQUIRE(traj.norm_series.segment(k_T - 2, 5).minCoeff() < 5e-3);

    SECTION("bounds stated by the controller must match the plant") {
        optreg::Controller ctrl = optreg::Controller::bang_replay(res);
        ctrl.force_bounds = VectorXd::Constant(1, 2.0);
        REQUIRE_THROWS_AS(optreg::simulate(plant, ctrl, 3.0, 1e-3), optreg::InvalidArgument);
    }
}

TEST_CASE("simulation input validation", "[sim]") {
    optreg::LinearPlant plant = helpers::double_integrator();
    optreg::Controller none = optreg::Controller::none();
    REQUIRE_THROWS_AS(optreg::simulate(plant, none, 1.0, 0.0), optreg::InvalidArgument);
    REQUIRE_THROWS_AS(optreg::simulate(plant, none, 0.0, 0.1), optreg::InvalidArgument);
    REQUIRE_THROWS_AS(optreg::simulate(plant, none, 1.0, 0.2), optreg::InvalidArgument);
    REQUIRE_THROWS_AS(optreg::simulate(plant, none, 1.0, 0.01, 3), optreg::InvalidArgument);

    optreg::RiccatiSolution sol;
    sol.G = MatrixXd::Zero(1, 3);
    REQUIRE_THROWS_AS(optreg::simulate(plant, optreg::Controller::lqr_saturated(sol), 1.0, 0.01),
                      optreg::DimensionMismatch);

    optreg::Trajectory empty;
    REQUIRE_THROWS_AS(optreg::settling_time(empty), optreg::EmptyTrajectory);
    REQUIRE_THROWS_AS(optreg::max_control(empty), optreg::EmptyTrajectory);
}

TEST_CASE("trajectory bookkeeping", "[sim]") {
    optreg::LinearPlant plant = oscillator(std::numeric_limits<double>::infinity());
    optreg::Trajectory traj = optreg::simulate(plant, optreg::Controller::none(), 2.0, 0.01, 1);
    REQUIRE(traj.n_samples() == 201);
    REQUIRE(traj.dt == 0.01);
    REQUIRE(std::abs(traj.duration() - 2.0) < 1e-12);
    for (int k = 1; k < 5; ++k)
        REQUIRE(std::abs(traj.times[k] - traj.times[k - 1] - 0.01) < 1e-12);
    REQUIRE(traj.norm_dims == 1);
    // The restricted norm tracks |x1| alone.
    REQUIRE(std::abs(traj.norm_series[0] - std::abs(traj.states(0, 0))) < 1e-15);
    int mid = 100;
    REQUIRE(std::abs(traj.norm_series[mid] - std::abs(traj.states(mid, 0))) < 1e-15);
}

TEST_CASE("controller comparison preserves order and ranks settling", "[sim]") {
    optreg::LinearPlant plant = helpers::siso_benchmark(1.0);

    optreg::ShootingConfig sc;
    sc.seed = 1;
    optreg::ShootingResult res = optreg::shoot(plant, sc);
    REQUIRE(res.converged);

    std::vector<optreg::Controller> controllers;
    controllers.push_back(optreg::Controller::bang_replay(res));
    controllers.push_back(optreg::Controller::lqr_saturated(
        optreg::solve_care(plant, helpers::benchmark_weights(100.0)), "lqr100"));
    controllers.push_back(optreg::Controller::none());

    optreg::ComparisonReport report = optreg::compare(plant, controllers, 100.0, 1e-3);
    REQUIRE(report.rows.size() == 3);
    REQUIRE(report.rows[0].label == "bang");
    REQUIRE(report.rows[1].label == "lqr100");
    REQUIRE(report.rows[2].label == "none");
    for (const auto& row : report.rows) {
        REQUIRE(row.settling.has_value());
        REQUIRE_FALSE(row.diverged);
    }
    REQUIRE(*report.rows[0].settling < *report.rows[1].settling);
    REQUIRE(*report.rows[1].settling < *report.rows[2].settling);
    REQUIRE(report.rows[2].max_force[0] == 0.0);
}
