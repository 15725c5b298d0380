#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "optreg/io.hpp"

#include "helpers.hpp"

using optreg::json;
using optreg::MatrixXd;
using optreg::VectorXd;

namespace {

// Runs f, which must throw E, and hands back the exception text.
template <class E, class F>
std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    FAIL("expected an exception");
    return {};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

} // namespace

TEST_CASE("matrix parsing names the offending row", "[io]") {
    json good = json::parse(R"([[1,2,3],[4,5,6]])");
    MatrixXd M = optreg::parse_matrix(good, "K");
    REQUIRE(M.rows() == 2);
    REQUIRE(M.cols() == 3);
    REQUIRE(M(1, 2) == 6.0);

    json ragged = json::parse(R"([[1,2,3],[4,5]])");
    std::string msg = thrown_message<optreg::InvalidArgument>(
        [&] { optreg::parse_matrix(ragged, "K"); });
    REQUIRE(helpers::contains(msg, "K"));
    REQUIRE(helpers::contains(msg, "row 1"));
    REQUIRE(helpers::contains(msg, "expected 3"));

    json not_row = json::parse(R"([[1,2],3])");
    msg = thrown_message<optreg::InvalidArgument>(
        [&] { optreg::parse_matrix(not_row, "M"); });
    REQUIRE(helpers::contains(msg, "row 1"));

    REQUIRE_THROWS_AS(optreg::parse_matrix(json::parse("[]"), "M"),
                      optreg::InvalidArgument);
    REQUIRE_THROWS_AS(optreg::parse_matrix(json::parse(R"([["a"]])"), "M"),
                      optreg::InvalidArgument);
}

TEST_CASE("vector parsing accepts inf only where it makes sense", "[io]") {
    json j = json::parse(R"([1, "inf", "-inf"])");
    VectorXd v = optreg::parse_vector(j, "force_bounds", true);
    REQUIRE(v.size() == 3);
    REQUIRE(v[0] == 1.0);
    REQUIRE(std::isinf(v[1]));
    REQUIRE(v[1] > 0.0);
    REQUIRE(std::isinf(v[2]));
    REQUIRE(v[2] < 0.0);

    std::string msg = thrown_message<optreg::InvalidArgument>(
        [&] { optreg::parse_vector(j, "x0"); });
    REQUIRE(helpers::contains(msg, "x0[1]"));
    REQUIRE(helpers::contains(msg, "must be a number"));
}

TEST_CASE("numbers survive the round trip through g17", "[io]") {
    for (double v : {0.1, 1.0 / 3.0, 2.0, 1e-17, -3.5e300, 6.283185307179586}) {
        std::string s = optreg::g17(v);
        REQUIRE(std::stod(s) == v);
    }
    REQUIRE(optreg::g17(0.0) == "0");
    REQUIRE(optreg::g17(2.0) == "2");
    REQUIRE(optreg::bound_token(std::numeric_limits<double>::infinity()) == "inf");
    REQUIRE(optreg::bound_token(2.5) == "2.5");
}

TEST_CASE("trajectory and matrix CSV have a fixed layout", "[io]") {
    optreg::Trajectory traj;
    traj.dt = 0.5;
    traj.times = VectorXd::LinSpaced(2, 0.0, 0.5);
    traj.states = MatrixXd(2, 2);
    traj.states << 3.0, 4.0, 0.0, 0.0;
    traj.controls = MatrixXd(2, 1);
    traj.controls << 0.25, 0.5;
    traj.norm_dims = 2;
    traj.norm_series = optreg::state_norms(traj.states, 2);

    REQUIRE(optreg::trajectory_csv(traj) ==
            "t,x1,x2,f1,norm\n"
            "0,3,4,0.25,5\n"
            "0.5,0,0,0.5,0\n");

    MatrixXd M(2, 2);
    M << 1.5, -2.0, 3.0, 4.0;
    REQUIRE(optreg::matrix_csv(M) == "1.5,-2\n3,4\n");
}

TEST_CASE("state-space models load with unbounded defaults", "[io]") {
    json j = json::parse(R"({
        "A": [[0, 1], [0, 0]],
        "B": [[0], [1]],
        "x0": [1, 0]
    })");
    optreg::LoadedModel loaded = optreg::load_model(j);
    REQUIRE_FALSE(loaded.plant.bounded());
    REQUIRE_FALSE(loaded.structure.has_value());
    REQUIRE_FALSE(loaded.modal.has_value());
    REQUIRE(loaded.plant.A(0, 1) == 1.0);
    REQUIRE(loaded.plant.x0[0] == 1.0);

    json with_bounds = j;
    with_bounds["force_bounds"] = json::array({2.0});
    REQUIRE(optreg::load_model(with_bounds).plant.bounded());
}

TEST_CASE("structural models load through the modal route", "[io]") {
    json j = json::parse(R"({
        "M": [[1]],
        "K": [[4]],
        "zeta": [0.03],
        "D": [[1]],
        "force_bounds": [1],
        "x0": [0, 1]
    })");
    optreg::LoadedModel loaded = optreg::load_model(j);
    REQUIRE(loaded.structure.has_value());
    REQUIRE(loaded.modal.has_value());
    REQUIRE(std::abs(loaded.modal->frequencies[0] - 2.0) < 1e-12);

    MatrixXd A_expect(2, 2);
    A_expect << 0.0, 1.0, -4.0, -0.12;
    REQUIRE((loaded.plant.A - A_expect).norm() < 1e-12);
    REQUIRE(std::abs(loaded.plant.B(1, 0) - 1.0) < 1e-12);
    REQUIRE((loaded.plant.x0 - Eigen::Vector2d(0.0, 1.0)).norm() < 1e-12);

    // The same initial state given directly in modal coordinates.
    json jm = j;
    jm.erase("x0");
    jm["x0_modal"] = json::array({0.0, 1.0});
    optreg::LoadedModel modal_route = optreg::load_model(jm);
    REQUIRE((modal_route.plant.x0 - loaded.plant.x0).norm() == 0.0);
    REQUIRE((modal_route.plant.A - loaded.plant.A).norm() == 0.0);
}

TEST_CASE("model loading names what is missing", "[io]") {
    auto msg_for = [](const char* text) {
        json j = json::parse(text);
        return thrown_message<optreg::InvalidArgument>([&] { optreg::load_model(j); });
    };

    REQUIRE(helpers::contains(msg_for(R"({"B": [[1]]})"), "M/K/D"));
    REQUIRE(helpers::contains(msg_for(R"({"A": [[1]]})"), "needs B"));
    REQUIRE(helpers::contains(msg_for(R"({"A": [[-1]], "B": [[1]]})"), "x0"));
    REQUIRE(helpers::contains(msg_for(R"({"M": [[1]]})"), "needs K"));
    REQUIRE(helpers::contains(msg_for(R"({"M": [[1]], "K": [[1]]})"), "needs D"));
    REQUIRE(helpers::contains(
        msg_for(R"({"M": [[1]], "K": [[1]], "D": [[1]], "zeta": [0.1]})"), "x0"));
    REQUIRE(helpers::contains(msg_for(R"([1, 2])"), "object"));
}

TEST_CASE("run configs merge defaults, lists, and model files", "[io]") {
    namespace fs = std::filesystem;
    fs::create_directories("io_scratch/sub");

    SECTION("defaults") {
        write_file("io_scratch/minimal.json", R"({"command": "compare"})");
        optreg::RunConfig cfg = optreg::load_run_config("io_scratch/minimal.json");
        REQUIRE(cfg.command == "compare");
        REQUIRE(cfg.rho_list == std::vector<double>{1.0});
        REQUIRE(cfg.bound_list.empty());
        REQUIRE(cfg.horizon == 100.0);
        REQUIRE(cfg.dt == 1e-3);
        REQUIRE(cfg.seed == 0);
        REQUIRE(cfg.out_dir == "out");
        REQUIRE(cfg.norm_dims == 0);
        REQUIRE(cfg.tau_steps == 2000);
        REQUIRE(cfg.max_iterations == 5000);
        REQUIRE(cfg.restarts == 16);
        REQUIRE(cfg.terminal_tolerance == 1e-6);
        REQUIRE(cfg.controller == "none");
        REQUIRE(cfg.curve_samples == 512);
    }

    SECTION("lists and scalars") {
        write_file("io_scratch/lists.json", R"({
            "command": "sweep",
            "rho": [0.5, 2],
            "bound": [1, "inf"],
            "horizon": 30,
            "dt": 0.002,
            "seed": 7,
            "out": "results",
            "norm_dims": 2
        })");
        optreg::RunConfig cfg = optreg::load_run_config("io_scratch/lists.json");
        REQUIRE(cfg.rho_list == std::vector<double>{0.5, 2.0});
        REQUIRE(cfg.bound_list.size() == 2);
        REQUIRE(cfg.bound_list[0] == 1.0);
        REQUIRE(std::isinf(cfg.bound_list[1]));
        REQUIRE(cfg.horizon == 30.0);
        REQUIRE(cfg.dt == 0.002);
        REQUIRE(cfg.seed == 7);
        REQUIRE(cfg.out_dir == "results");
        REQUIRE(cfg.norm_dims == 2);
    }

    SECTION("model_path resolves next to the config file") {
        write_file("io_scratch/sub/model.json", R"({
            "A": [[-1]], "B": [[1]], "x0": [0.5]
        })");
        write_file("io_scratch/sub/cfg.json", R"({
            "command": "lqr", "model_path": "model.json"
        })");
        optreg::RunConfig cfg = optreg::load_run_config("io_scratch/sub/cfg.json");
        optreg::LoadedModel loaded = optreg::load_model(cfg.model);
        REQUIRE(loaded.plant.n_states() == 1);
        REQUIRE(loaded.plant.x0[0] == 0.5);
    }

    SECTION("unknown keys are rejected by name") {
        write_file("io_scratch/typo.json", R"({"comand": "lqr"})");
        std::string msg = thrown_message<optreg::InvalidArgument>(
            [] { optreg::load_run_config("io_scratch/typo.json"); });
        REQUIRE(helpers::contains(msg, "comand"));
    }

    SECTION("empty rho list is rejected") {
        write_file("io_scratch/empty_rho.json", R"({"command": "lqr", "rho": []})");
        REQUIRE_THROWS_AS(optreg::load_run_config("io_scratch/empty_rho.json"),
                          optreg::InvalidArgument);
    }

    SECTION("non-numeric scalar fields are rejected") {
        write_file("io_scratch/bad_horizon.json",
                   R"({"command": "lqr", "horizon": "fast"})");
        std::string msg = thrown_message<optreg::InvalidArgument>(
            [] { optreg::load_run_config("io_scratch/bad_horizon.json"); });
        REQUIRE(helpers::contains(msg, "horizon"));
    }

    SECTION("missing files and broken JSON carry the path") {
        std::string msg = thrown_message<optreg::InvalidArgument>(
            [] { optreg::load_run_config("io_scratch/nope.json"); });
        REQUIRE(helpers::contains(msg, "io_scratch/nope.json"));

        write_file("io_scratch/broken.json", "{not json");
        msg = thrown_message<optreg::InvalidArgument>(
            [] { optreg::load_run_config("io_scratch/broken.json"); });
        REQUIRE(helpers::contains(msg, "broken.json"));
    }
}
