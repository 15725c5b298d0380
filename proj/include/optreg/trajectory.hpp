#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace optreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sampled closed-loop history on a uniform time grid. Row k of `states`
/// and `controls` belongs to times[k]; the control row is the value applied
/// over [t_k, t_k + dt) (the final row is the feedback evaluated at the last
/// state, for completeness). norm_series[k] is the displacement norm
/// sqrt(sum of the first norm_dims squared state entries); norm_dims equals
/// the full state dimension unless the caller restricted it.
struct Trajectory {
    double dt = 0.0;
    VectorXd times;
    MatrixXd states;   // n_samples x n_states
    MatrixXd controls; // n_samples x n_inputs
    VectorXd norm_series;
    int norm_dims = 0;
    bool diverged = false; // true when integration hit non-finite values;
                           // the stored samples are the finite prefix
    std::string note;

    int n_samples() const { return static_cast<int>(times.size()); }
    int n_states() const { return static_cast<int>(states.cols()); }
    int n_inputs() const { return static_cast<int>(controls.cols()); }

    double duration() const {
        return times.size() > 0 ? times[times.size() - 1] - times[0] : 0.0;
    }
};

inline VectorXd state_norms(const MatrixXd& states, int norm_dims) {
    if (norm_dims <= 0 || norm_dims > states.cols())
        throw InvalidArgument("norm_dims must lie in [1, " + std::to_string(states.cols()) +
                              "], got " + std::to_string(norm_dims));
    return states.leftCols(norm_dims).rowwise().norm();
}

} // namespace optreg
