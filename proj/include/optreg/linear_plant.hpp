#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace optreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Continuous-time plant
///
///     dx/dt = A x + B f,   |f_i| <= force_bounds[i],
///
/// together with the initial state the regulator has to drive to the origin.
/// A bound of +infinity marks an unconstrained actuator; the minimum-time
/// solver requires every bound to be finite, the LQR path does not.
struct LinearPlant {
    MatrixXd A;            // n_states x n_states
    MatrixXd B;            // n_states x n_inputs
    VectorXd force_bounds; // n_inputs, each > 0, +inf allowed
    VectorXd x0;           // n_states

    int n_states() const { return static_cast<int>(A.rows()); }
    int n_inputs() const { return static_cast<int>(B.cols()); }

    bool bounded() const {
        for (int i = 0; i < force_bounds.size(); ++i)
            if (!std::isfinite(force_bounds[i])) return false;
        return force_bounds.size() > 0;
    }

    /// Throws ValidationError subtypes on inconsistent or non-finite data.
    void validate() const {
        if (A.rows() == 0 || A.rows() != A.cols())
            throw DimensionMismatch("A must be square and non-empty, got " +
                                    std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
        if (B.rows() != A.rows())
            throw DimensionMismatch("B has " + std::to_string(B.rows()) +
                                    " rows, expected " + std::to_string(A.rows()));
        if (B.cols() == 0)
            throw DimensionMismatch("B must have at least one column");
        if (force_bounds.size() != B.cols())
            throw DimensionMismatch("force_bounds has " + std::to_string(force_bounds.size()) +
                                    " entries, expected " + std::to_string(B.cols()));
        if (x0.size() != A.rows())
            throw DimensionMismatch("x0 has " + std::to_string(x0.size()) +
                                    " entries, expected " + std::to_string(A.rows()));
        if (!A.allFinite())
            throw InvalidArgument("A contains non-finite entries");
        if (!B.allFinite())
            throw InvalidArgument("B contains non-finite entries");
        if (!x0.allFinite())
            throw InvalidArgument("x0 contains non-finite entries");
        for (int i = 0; i < force_bounds.size(); ++i) {
            double f = force_bounds[i];
            if (std::isnan(f) || f <= 0.0)
                throw InvalidArgument("force_bounds[" + std::to_string(i) +
                                      "] must be positive, got " + std::to_string(f));
        }
    }

    static LinearPlant make(MatrixXd A, MatrixXd B, VectorXd force_bounds, VectorXd x0) {
        LinearPlant p{std::move(A), std::move(B), std::move(force_bounds), std::move(x0)};
        p.validate();
        return p;
    }
};

/// Relative Frobenius asymmetry test used throughout: ||M - M^T|| against
/// max(1, ||M||).
inline bool is_symmetric(const MatrixXd& M, double rel_tol = 1e-10) {
    if (M.rows() != M.cols()) return false;
    double scale = std::max(1.0, M.norm());
    return (M - M.transpose()).norm() <= rel_tol * scale;
}

} // namespace optreg
