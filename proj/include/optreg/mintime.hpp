#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linear_plant.hpp"
#include "nelder_mead.hpp"
#include "trajectory.hpp"

namespace optreg {

/// Joint state/costate point for the two-point boundary value problem
///
///     x' = A x + B f,   lambda' = -A' lambda,
///     f_i = F_i sign((B' lambda)_i).
struct CostateState {
    VectorXd x;
    VectorXd lambda;
};

/// Extremal control for a costate value; sign(0) counts as +1 so the map is
/// total and deterministic. Requires every force bound finite.
inline VectorXd bang_control(const LinearPlant& plant, const VectorXd& lambda) {
    if (lambda.size() != plant.n_states())
        throw DimensionMismatch("lambda has " + std::to_string(lambda.size()) +
                                " entries, expected " + std::to_string(plant.n_states()));
    if (!plant.bounded())
        throw InvalidArgument("bang-bang control needs finite force bounds on every actuator");
    VectorXd s = plant.B.transpose() * lambda;
    VectorXd f(s.size());
    for (int i = 0; i < s.size(); ++i)
        f[i] = s[i] >= 0.0 ? plant.force_bounds[i] : -plant.force_bounds[i];
    return f;
}

/// Right-hand side of the joint system, mostly useful for testing the
/// integrator against an independent route.
inline CostateState costate_rhs(const LinearPlant& plant, const CostateState& s) {
    VectorXd f = bang_control(plant, s.lambda);
    return {plant.A * s.x + plant.B * f, -plant.A.transpose() * s.lambda};
}

struct ShootingConfig {
    VectorXd penalty_weights;         // per-state terminal weights, empty => ones
    double terminal_tolerance = 1e-6; // accept when sum C_i x_i(T)^2 falls below
    int tau_steps = 2000;             // fixed grid on normalized time [0,1]
    int max_iterations = 5000;        // total objective evaluations across all phases
    int restarts = 16;                // multi-start count
    std::uint64_t seed = 0;
};

struct ShootingResult {
    VectorXd lambda0;        // unit initial costate of the best extremal
    double c = 0.0;          // time-scale variable; equal to T
    double T = 0.0;          // minimum time found
    double terminal_penalty = 0.0;
    Trajectory trajectory;   // bang trajectory on the tau grid mapped to [0, T]
    MatrixXd switching;      // (B' lambda) per sample, one column per actuator
    bool converged = false;
    std::string status;      // "converged", "trivial", "budget_exhausted",
                             // "no_feasible_extremal"
    int evaluations = 0;
};

namespace detail {

// Deterministic normal deviates: explicit Box-Muller over mt19937_64 so the
// stream is reproducible everywhere.
struct GaussStream {
    std::mt19937_64 gen;
    double spare = 0.0;
    bool has_spare = false;

    explicit GaussStream(std::uint64_t seed) : gen(seed ^ 0x9e3779b97f4a7c15ULL) {}

    double uniform() { // open (0,1)
        return ((gen() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }
    double normal() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare = r * std::sin(2.0 * M_PI * u2);
        has_spare = true;
        return r * std::cos(2.0 * M_PI * u2);
    }
    VectorXd unit_vector(int d) {
        VectorXd v(d);
        do {
            for (int i = 0; i < d; ++i) v[i] = normal();
        } while (v.norm() < 1e-8);
        return v / v.norm();
    }
};

// Spherical chart: d-1 angles -> unit d-vector, and its inverse.
inline VectorXd sphere_from_angles(const VectorXd& th, int d) {
    VectorXd v(d);
    double prod = 1.0;
    for (int k = 0; k < d - 1; ++k) {
        v[k] = prod * std::cos(th[k]);
        prod *= std::sin(th[k]);
    }
    v[d - 1] = prod;
    return v;
}

inline VectorXd angles_from_unit(const VectorXd& v) {
    const int d = static_cast<int>(v.size());
    VectorXd th(d - 1);
    for (int k = 0; k < d - 1; ++k) {
        double rest = v.tail(d - 1 - k).norm();
        th[k] = std::atan2(rest, v[k]);
    }
    return th;
}

// One-step transition maps for the held-control step on the tau grid. RK4 on
// a linear system with the control frozen over the step collapses to these
// degree-4 Taylor maps, so this is the classical scheme, just precomputed.
struct StepMaps {
    MatrixXd Px; // state propagator
    MatrixXd Qf; // held-control injection
    MatrixXd Pl; // costate propagator
    bool finite = true;
};

inline StepMaps step_maps(const MatrixXd& A, const MatrixXd& B, double c, int steps) {
    const int n = static_cast<int>(A.rows());
    const double h = c / steps;
    MatrixXd M = h * A;
    MatrixXd M2 = M * M, M3 = M2 * M, M4 = M3 * M;
    MatrixXd I = MatrixXd::Identity(n, n);
    StepMaps maps;
    maps.Px = I + M + 0.5 * M2 + M3 / 6.0 + M4 / 24.0;
    maps.Qf = h * (I + 0.5 * M + M2 / 6.0 + M3 / 24.0) * B;
    MatrixXd Mt = -M.transpose();
    MatrixXd Mt2 = Mt * Mt, Mt3 = Mt2 * Mt, Mt4 = Mt3 * Mt;
    maps.Pl = I + Mt + 0.5 * Mt2 + Mt3 / 6.0 + Mt4 / 24.0;
    maps.finite = maps.Px.allFinite() && maps.Qf.allFinite() && maps.Pl.allFinite();
    return maps;
}

constexpr double kInfeasible = 1e100;

// Initial costate whose switching function B'lambda(t) vanishes at the given
// horizon fractions: lambda0 orthogonal to the reachability vectors
// g(t) = e^{-At}B at t = frac_j * c, taken from the null space of the stacked
// rows. Returns a unit vector, or zero when the rows are degenerate.
inline VectorXd costate_for_switches(const MatrixXd& A, const VectorXd& b,
                                     const VectorXd& fracs, double c) {
    const int n = static_cast<int>(A.rows());
    const int k = static_cast<int>(fracs.size());
    const int walk =
        std::max(240, std::min(4000, static_cast<int>(6.0 * c * A.cwiseAbs().maxCoeff())));
    const double h = c / walk;
    auto taylor4 = [&](double dt) {
        MatrixXd M = -dt * A;
        MatrixXd M2 = M * M;
        return (MatrixXd::Identity(n, n) + M + 0.5 * M2 + M2 * M / 6.0 + M2 * M2 / 24.0)
            .eval();
    };
    const MatrixXd P = taylor4(h);
    MatrixXd rows(k, n);
    VectorXd g = b;
    int idx = 0;
    // Snapshot each g(frac * c) with a partial step so the placement is
    // continuous rather than quantized to the walk grid.
    for (int step = 0; step < walk && idx < k; ++step) {
        while (idx < k) {
            const double target = fracs[idx] * walk;
            if (!(target >= step && target < step + 1.0)) break;
            rows.row(idx) = (taylor4((target - step) * h) * g).transpose();
            ++idx;
        }
        g = P * g;
    }
    if (idx < k || !rows.allFinite()) return VectorXd::Zero(n);
    Eigen::JacobiSVD<MatrixXd> svd(rows, Eigen::ComputeFullV);
    VectorXd lam = svd.matrixV().col(n - 1);
    if (!(lam.norm() > 1e-12)) return VectorXd::Zero(n);
    return lam.normalized();
}

// Terminal penalty sum C_i x_i(1)^2 for one (lambda0, c) trial.
inline double shot_penalty(const LinearPlant& plant, const VectorXd& C, int steps,
                           const VectorXd& lambda0, double c) {
    if (!(c > 1e-9) || !(c < 1e8) || !std::isfinite(c)) return kInfeasible;
    StepMaps maps = step_maps(plant.A, plant.B, c, steps);
    if (!maps.finite) return kInfeasible;

    VectorXd x = plant.x0;
    VectorXd lam = lambda0;
    VectorXd s(plant.n_inputs()), f(plant.n_inputs());
    for (int k = 0; k < steps; ++k) {
        s.noalias() = plant.B.transpose() * lam;
        for (int i = 0; i < s.size(); ++i)
            f[i] = s[i] >= 0.0 ? plant.force_bounds[i] : -plant.force_bounds[i];
        x = maps.Px * x + maps.Qf * f;
        lam = maps.Pl * lam;
    }
    if (!x.allFinite()) return kInfeasible;
    return (C.array() * x.array().square()).sum();
}

} // namespace detail

/// Penalty shooting for the minimum-time bang-bang regulator. Searches over
/// the unit initial costate and the time scale c with multi-start
/// Nelder-Mead, keeps the smallest c whose terminal penalty clears the
/// tolerance, then tightens c by a shrink-and-reoptimize continuation.
/// Deterministic for a fixed seed.
inline ShootingResult shoot(const LinearPlant& plant, const ShootingConfig& config = {}) {
    plant.validate();
    if (!plant.bounded())
        throw InvalidArgument("bang-bang control needs finite force bounds on every actuator");
    const int n = plant.n_states();
    if (config.tau_steps < 10)
        throw InvalidArgument("tau_steps must be at least 10");
    if (!(config.terminal_tolerance > 0.0))
        throw InvalidArgument("terminal_tolerance must be positive");
    if (config.max_iterations < 1 || config.restarts < 1)
        throw InvalidArgument("max_iterations and restarts must be positive");
    VectorXd C = config.penalty_weights.size() > 0 ? config.penalty_weights
                                                   : VectorXd::Ones(n);
    if (C.size() != n)
        throw DimensionMismatch("penalty_weights has " + std::to_string(C.size()) +
                                " entries, expected " + std::to_string(n));
    for (int i = 0; i < n; ++i)
        if (!(C[i] > 0.0))
            throw InvalidArgument("penalty_weights must be positive");

    ShootingResult out;

    auto finish = [&](const VectorXd& lambda0, double c, bool converged,
                      const std::string& status) {
        out.lambda0 = lambda0;
        out.c = c;
        out.T = c;
        out.converged = converged;
        out.status = status;

        // Rebuild the winning trajectory with full storage.
        const int N = config.tau_steps;
        detail::StepMaps maps = detail::step_maps(plant.A, plant.B, c, N);
        const double dt = c / N;
        out.trajectory.dt = dt;
        out.trajectory.times = VectorXd::LinSpaced(N + 1, 0.0, c);
        out.trajectory.states.resize(N + 1, n);
        out.trajectory.controls.resize(N + 1, plant.n_inputs());
        out.switching.resize(N + 1, plant.n_inputs());
        VectorXd x = plant.x0, lam = lambda0;
        for (int k = 0; k <= N; ++k) {
            VectorXd s = plant.B.transpose() * lam;
            VectorXd f(s.size());
            for (int i = 0; i < s.size(); ++i)
                f[i] = s[i] >= 0.0 ? plant.force_bounds[i] : -plant.force_bounds[i];
            out.trajectory.states.row(k) = x.transpose();
            out.trajectory.controls.row(k) = f.transpose();
            out.switching.row(k) = s.transpose();
            if (k < N) {
                x = maps.Px * x + maps.Qf * f;
                lam = maps.Pl * lam;
            }
        }
        out.trajectory.norm_dims = n;
        out.trajectory.norm_series = state_norms(out.trajectory.states, n);
        VectorXd xf = out.trajectory.states.row(N).transpose();
        out.terminal_penalty = (C.array() * xf.array().square()).sum();
        return out;
    };

    // Nothing to do from the origin.
    if (plant.x0.norm() == 0.0) {
        out.evaluations = 0;
        ShootingResult r = finish(VectorXd::Unit(n, 0), 0.0, true, "trivial");
        r.trajectory = Trajectory{};
        r.trajectory.dt = 0.0;
        r.trajectory.times = VectorXd::Zero(1);
        r.trajectory.states = plant.x0.transpose();
        r.trajectory.controls = MatrixXd::Zero(1, plant.n_inputs());
        r.trajectory.norm_dims = n;
        r.trajectory.norm_series = VectorXd::Zero(1);
        r.switching = MatrixXd::Zero(1, plant.n_inputs());
        r.terminal_penalty = 0.0;
        return r;
    }

    // Time-scale heuristic from the slowest decaying mode.
    double c_heuristic = 10.0;
    {
        Eigen::ComplexEigenSolver<MatrixXd> ae(plant.A);
        if (ae.info() == Eigen::Success) {
            double slowest = std::numeric_limits<double>::infinity();
            for (int k = 0; k < n; ++k)
                slowest = std::min(slowest, std::abs(ae.eigenvalues()[k].real()));
            if (slowest > 1e-9) c_heuristic = 4.0 / slowest;
        }
    }

    const double tol = config.terminal_tolerance;
    int evals = 0;
    const int budget = config.max_iterations;

    // Best feasible so far (smallest c wins, first hit breaks ties).
    bool have_feasible = false;
    double best_c = std::numeric_limits<double>::infinity();
    VectorXd best_lambda0;
    // Best penalty overall, for diagnostics when nothing is feasible.
    double best_pen = detail::kInfeasible;
    VectorXd diag_lambda0 = VectorXd::Unit(n, 0);
    double diag_c = c_heuristic;

    auto trial = [&](const VectorXd& lambda0, double c) {
        ++evals;
        double pen = detail::shot_penalty(plant, C, config.tau_steps, lambda0, c);
        if (pen < best_pen) {
            best_pen = pen;
            diag_lambda0 = lambda0;
            diag_c = c;
        }
        if (pen < tol && c < best_c) {
            have_feasible = true;
            best_c = c;
            best_lambda0 = lambda0;
        }
        return pen;
    };

    detail::GaussStream rng(config.seed);
    const int R = config.restarts;

    // Scan phase: random costate directions crossed with a geometric c
    // ladder around the heuristic.
    struct Seed {
        VectorXd lambda0;
        double c;
        double pen;
        VectorXd fracs; // switch-placement coordinates; empty for random seeds
    };
    std::vector<Seed> seeds;
    {
        std::vector<double> ladder;
        for (int j = -5; j <= 2; ++j) ladder.push_back(c_heuristic * std::pow(2.0, j));
        std::vector<VectorXd> dirs;
        if (n == 1) {
            dirs.push_back(VectorXd::Constant(1, 1.0));
            dirs.push_back(VectorXd::Constant(1, -1.0));
        } else {
            for (int r = 0; r < R; ++r) dirs.push_back(rng.unit_vector(n));
        }
        for (const VectorXd& d : dirs) {
            Seed s{d, ladder[0], detail::kInfeasible};
            for (double c : ladder) {
                if (evals >= budget) break;
                double pen = trial(d, c);
                if (pen < s.pen) {
                    s.pen = pen;
                    s.c = c;
                }
            }
            seeds.push_back(std::move(s));
            if (evals >= budget) break;
        }

        // Structured seeds for single-input plants: a costate orthogonal to
        // the reachability vectors g(t) = e^{-At}B at n-1 chosen instants puts
        // the switching-function zeros exactly there. The feasible basin in
        // costate angle can be fractions of a milliradian wide, far below
        // what random directions reach; switch-placement space has no such
        // needle, so these seeds (and their polish, below) work there.
        if (plant.n_inputs() == 1 && n >= 2 && n <= 7) {
            const std::vector<double> grid = {0.15, 0.3, 0.45, 0.6, 0.75, 0.9};
            // Denser rungs than the random scan: the closer a seed's horizon
            // sits to the true minimum, the shorter the polish crawl.
            std::vector<double> rungs;
            for (int j = -10; j <= 4; ++j)
                rungs.push_back(c_heuristic * std::pow(2.0, 0.5 * j));
            std::vector<int> combo(n - 1);
            for (double c : rungs) {
                if (evals >= budget) break;
                // Ascending (n-1)-subsets of the instant grid.
                for (int j = 0; j < n - 1; ++j) combo[j] = j;
                while (true) {
                    VectorXd fr(n - 1);
                    for (int j = 0; j < n - 1; ++j) fr[j] = grid[combo[j]];
                    VectorXd lam = detail::costate_for_switches(plant.A, plant.B.col(0), fr, c);
                    if (lam.norm() > 0.5 && evals + 2 <= budget) {
                        seeds.push_back(Seed{lam, c, trial(lam, c), fr});
                        seeds.push_back(Seed{-lam, c, trial(-lam, c), fr});
                    }
                    // Next combination.
                    int j = n - 2;
                    while (j >= 0 && combo[j] == static_cast<int>(grid.size()) - (n - 1) + j)
                        --j;
                    if (j < 0) break;
                    ++combo[j];
                    for (int q = j + 1; q < n - 1; ++q) combo[q] = combo[q - 1] + 1;
                }
                if (evals >= budget) break;
            }
        }

        std::stable_sort(seeds.begin(), seeds.end(),
                         [](const Seed& a, const Seed& b) { return a.pen < b.pen; });
    }

    // Polish phase: restarted Nelder-Mead from each seed over (angles, ln c);
    // for a one-state plant the costate sign is frozen and only ln c moves.
    // One simplex pass rarely bottoms out a curved penalty valley, so a fresh,
    // tighter simplex is rebuilt at the incumbent while it keeps improving.
    auto descend = [&](const std::function<double(const VectorXd&)>& fn,
                       const VectorXd& start, double step0, int share) {
        NelderMeadResult best;
        best.x = start;
        best.f = detail::kInfeasible;
        double step = step0;
        const int dim = static_cast<int>(start.size());
        while (share >= 2 * dim + 2 && evals < budget) {
            NelderMeadOptions nm;
            nm.max_evals = std::min(share, budget - evals);
            nm.f_target = 0.1 * tol;
            nm.init_steps = VectorXd::Constant(dim, step);
            NelderMeadResult r = nelder_mead(fn, best.x, nm);
            share -= r.evals;
            const bool improved = r.f < 0.9 * best.f;
            if (r.f < best.f) {
                best.f = r.f;
                best.x = r.x;
            }
            if (best.f < tol || !improved) break;
            step = std::max(0.02, 0.35 * step);
        }
        return best;
    };
    {
        const int polish_budget = static_cast<int>(0.6 * budget);
        const std::size_t polish_count =
            std::min(seeds.size(), static_cast<std::size_t>(std::max(1, R)));
        for (std::size_t r = 0; r < polish_count; ++r) {
            int left = std::min(budget - evals, polish_budget / std::max<int>(1, (int)polish_count));
            if (left < n + 3) break;
            const Seed& s = seeds[r];
            if (s.fracs.size() > 0) {
                // Structured polish: optimize the switch placements and ln c
                // directly; the costate is rebuilt from the null-space
                // condition each evaluation, so the search never has to find
                // the razor-thin feasible cone in angle space.
                VectorXd z0s(n);
                z0s.head(n - 1) = s.fracs;
                z0s[n - 1] = std::log(s.c);
                const VectorXd anchor = s.lambda0;
                auto fzs = [&](const VectorXd& z) {
                    if (std::abs(z[n - 1]) > 20.0) return detail::kInfeasible;
                    for (int j = 0; j < n - 1; ++j) {
                        if (z[j] < 0.01 || z[j] > 0.99) return detail::kInfeasible;
                        if (j > 0 && z[j] < z[j - 1] + 0.005) return detail::kInfeasible;
                    }
                    const double ch = std::exp(z[n - 1]);
                    VectorXd lam = detail::costate_for_switches(plant.A, plant.B.col(0),
                                                                z.head(n - 1), ch);
                    if (lam.norm() < 0.5) return detail::kInfeasible;
                    if (lam.dot(anchor) < 0.0) lam = -lam;
                    return trial(lam, ch);
                };
                NelderMeadResult pr = descend(fzs, z0s, 0.07, left);
                // A near-miss here is almost always the right valley with the
                // slice spent mid-descent; keep going while it pays off.
                while (!have_feasible && pr.f < 1e4 * tol && evals < budget) {
                    const int extra = std::min(budget - evals, std::max(150, left));
                    NelderMeadResult nr = descend(fzs, pr.x, 0.03, extra);
                    const bool big_gain = nr.f < 0.7 * pr.f;
                    if (nr.f < pr.f) pr = nr;
                    if (!big_gain) break;
                }
                if (evals >= budget) break;
                continue;
            }
            VectorXd z0(n);
            if (n > 1) z0.head(n - 1) = detail::angles_from_unit(s.lambda0);
            z0[n - 1] = std::log(s.c);
            const double sign1 = s.lambda0[0] >= 0.0 ? 1.0 : -1.0;

            auto fz = [&](const VectorXd& z) {
                if (std::abs(z[n - 1]) > 20.0) return detail::kInfeasible;
                VectorXd lam0 = n == 1 ? VectorXd::Constant(1, sign1)
                                       : detail::sphere_from_angles(z.head(n - 1), n);
                return trial(lam0, std::exp(z[n - 1]));
            };
            if (n == 1) {
                descend(
                    [&](const VectorXd& z1) {
                        VectorXd z(1);
                        z[0] = z1[0];
                        return fz(z);
                    },
                    z0.tail(1).eval(), 0.30, left);
            } else {
                descend(fz, z0, 0.33, left);
            }
            if (evals >= budget) break;
        }

        // Intensification: every seed stalled, so spend part of the remaining
        // allowance running the same restarted descent from the best point
        // seen anywhere in the search.
        if (!have_feasible && evals < budget) {
            const double sign1 = diag_lambda0[0] >= 0.0 ? 1.0 : -1.0;
            auto fz = [&](const VectorXd& z) {
                if (std::abs(z[n - 1]) > 20.0) return detail::kInfeasible;
                VectorXd lam0 = n == 1 ? VectorXd::Constant(1, sign1)
                                       : detail::sphere_from_angles(z.head(n - 1), n);
                return trial(lam0, std::exp(z[n - 1]));
            };
            const int share =
                std::min(budget - evals, std::max(200, static_cast<int>(0.3 * budget)));
            if (n == 1) {
                VectorXd z0(1);
                z0[0] = std::log(diag_c);
                descend(
                    [&](const VectorXd& z1) {
                        VectorXd z(1);
                        z[0] = z1[0];
                        return fz(z);
                    },
                    z0, 0.10, share);
            } else {
                VectorXd z0(n);
                z0.head(n - 1) = detail::angles_from_unit(diag_lambda0);
                z0[n - 1] = std::log(diag_c);
                descend(fz, z0, 0.08, share);
            }
        }
    }

    if (!have_feasible) {
        out.evaluations = evals;
        return finish(diag_lambda0, diag_c, false,
                      evals >= budget ? "budget_exhausted" : "no_feasible_extremal");
    }

    // Continuation: walk c down, re-optimizing the costate direction at each
    // shrunk value; halve the step on failure.
    {
        double eta = 0.04;
        while (evals < budget && eta >= 2e-5) {
            double c_try = best_c * (1.0 - eta);
            bool ok = false;
            if (n == 1) {
                ok = trial(best_lambda0, c_try) < tol;
            } else {
                VectorXd th0 = detail::angles_from_unit(best_lambda0);
                NelderMeadOptions nm;
                nm.max_evals = std::min(90, budget - evals);
                nm.f_target = 0.5 * tol;
                nm.init_step = 0.03;
                NelderMeadResult res = nelder_mead(
                    [&](const VectorXd& th) {
                        return trial(detail::sphere_from_angles(th, n), c_try);
                    },
                    th0, nm);
                ok = res.f < tol;
            }
            // trial() already recorded any feasible (c_try, lambda0) pair.
            if (ok) {
                eta = std::min(0.08, eta * 1.3);
            } else {
                eta *= 0.5;
            }
        }
    }

    out.evaluations = evals;
    ShootingResult r = finish(best_lambda0, best_c, true, "converged");
    r.evaluations = evals;
    return r;
}

/// Sign-change instants of each actuator's switching function, recovered
/// from the stored (B' lambda) samples by linear interpolation.
inline std::vector<std::vector<double>> switch_times(const ShootingResult& result) {
    if (result.switching.rows() == 0)
        throw EmptyTrajectory("shooting result carries no switching samples");
    const int p = static_cast<int>(result.switching.cols());
    const int m = static_cast<int>(result.switching.rows());
    std::vector<std::vector<double>> out(p);
    for (int i = 0; i < p; ++i) {
        for (int k = 0; k + 1 < m; ++k) {
            double a = result.switching(k, i), b = result.switching(k + 1, i);
            bool sa = a >= 0.0, sb = b >= 0.0;
            if (sa == sb) continue;
            double t0 = result.trajectory.times[k];
            double t1 = result.trajectory.times[k + 1];
            double frac = (a - b) != 0.0 ? a / (a - b) : 0.5;
            out[i].push_back(t0 + frac * (t1 - t0));
        }
    }
    return out;
}

} // namespace optreg
