#pragma once

// Independent verification routes used by the tests: everything here goes
// through a different algorithm than the library code it checks (matrix
// exponentials, closed forms, brute-force searches).

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Exact flow of x' = A x over t.
inline VectorXd lti_flow(const MatrixXd& A, const VectorXd& x0, double t) {
    return MatrixXd((A * t).exp()) * x0;
}

// Exact one-step map for x' = A x + B f with f constant over h, via the
// augmented exponential.
inline VectorXd hold_step(const MatrixXd& A, const MatrixXd& B, const VectorXd& f,
                          const VectorXd& x, double h) {
    const int n = static_cast<int>(A.rows());
    MatrixXd aug = MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, 1) = B * f;
    MatrixXd e = (aug * h).exp();
    return e.topLeftCorner(n, n) * x + e.topRightCorner(n, 1);
}

// Scalar continuous Riccati: (b^2/r) p^2 - 2 a p - q = 0, positive root.
inline double scalar_care(double a, double b, double q, double r) {
    double s = b * b / r;
    return (a + std::sqrt(a * a + s * q)) / s;
}

// Plain-loop RK4 on x' = A x (no Eigen expressions in the hot path), for
// cross-checking the simulator's integrator.
inline VectorXd rk4_free(const MatrixXd& A, VectorXd x, double dt, int steps) {
    const int n = static_cast<int>(x.size());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto mul = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += A(i, j) * v[j];
            out[i] = s;
        }
    };
    std::vector<double> xv(n);
    for (int i = 0; i < n; ++i) xv[i] = x[i];
    for (int k = 0; k < steps; ++k) {
        mul(xv, k1);
        for (int i = 0; i < n; ++i) tmp[i] = xv[i] + 0.5 * dt * k1[i];
        mul(tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = xv[i] + 0.5 * dt * k2[i];
        mul(tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = xv[i] + dt * k3[i];
        mul(tmp, k4);
        for (int i = 0; i < n; ++i)
            xv[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (int i = 0; i < n; ++i) x[i] = xv[i];
    return x;
}

// Brute-force two-arc bang search for a 2-state single-input plant: try both
// initial signs, a grid of switch times, and track the earliest entry into
// the target ball on the second arc. Exact (matrix-exponential) stepping.
struct TwoArcResult {
    double T = std::numeric_limits<double>::infinity();
    double u0 = 0.0;
    double t_switch = 0.0;
    double miss = std::numeric_limits<double>::infinity();
};

inline TwoArcResult two_arc_search(const MatrixXd& A, const MatrixXd& B, double bound,
                                   const VectorXd& x0, double t_max, int grid,
                                   double ball = 1e-3) {
    const double h = t_max / grid;
    MatrixXd aug = MatrixXd::Zero(3, 3);
    aug.topLeftCorner(2, 2) = A;
    aug.topRightCorner(2, 1) = B * bound;
    MatrixXd ep = (aug * h).exp();
    MatrixXd Ad = ep.topLeftCorner(2, 2);
    VectorXd bp = ep.topRightCorner(2, 1); // drift for u = +bound
    TwoArcResult best;
    for (double u0 : {bound, -bound}) {
        VectorXd d1 = u0 > 0 ? bp : VectorXd(-bp);
        VectorXd d2 = -d1;
        VectorXd x = x0;
        for (int k1 = 0; k1 <= grid; ++k1) {
            // Second arc from x with the opposite sign.
            VectorXd y = x;
            for (int k2 = 0; k1 + k2 <= grid; ++k2) {
                double miss = y.norm();
                double T = (k1 + k2) * h;
                if (miss <= ball && T < best.T) {
                    best.T = T;
                    best.u0 = u0;
                    best.t_switch = k1 * h;
                    best.miss = miss;
                }
                if (miss < best.miss && best.T == std::numeric_limits<double>::infinity()) {
                    best.miss = miss; // diagnostics when nothing reaches the ball
                    best.u0 = u0;
                    best.t_switch = k1 * h;
                }
                y = Ad * y + d2;
            }
            x = Ad * x + d1;
        }
    }
    return best;
}

} // namespace oracles
