#pragma once

#include <string>

#include "optreg/riccati.hpp"
#include "optreg/structural.hpp"

namespace helpers {

// One-mode structural benchmark: unit mass, omega = 2 rad/s, 3% damping,
// collocated unit actuator, released from rest with unit modal velocity.
inline optreg::LinearPlant siso_benchmark(double bound) {
    optreg::StructuralModel model;
    model.M = optreg::MatrixXd::Constant(1, 1, 1.0);
    model.K = optreg::MatrixXd::Constant(1, 1, 4.0);
    model.modal_damping = optreg::VectorXd::Constant(1, 0.03);
    model.D = optreg::MatrixXd::Constant(1, 1, 1.0);
    optreg::ModalData modal = optreg::modal_decompose(model);
    optreg::VectorXd u0(2);
    u0 << 0.0, 1.0;
    return optreg::to_state_space_physical(model, modal, u0,
                                           optreg::VectorXd::Constant(1, bound));
}

// State weights matching the benchmark cost, where each squared state enters
// with coefficient one half.
inline optreg::LqrWeights benchmark_weights(double rho) {
    optreg::LqrWeights w;
    w.rho = rho;
    w.Qbar = 0.5 * optreg::MatrixXd::Identity(2, 2);
    return w;
}

inline optreg::LinearPlant double_integrator(double x1 = 1.0, double x2 = 0.0) {
    optreg::MatrixXd A(2, 2), B(2, 1);
    A << 0.0, 1.0, 0.0, 0.0;
    B << 0.0, 1.0;
    optreg::VectorXd x0(2);
    x0 << x1, x2;
    return optreg::LinearPlant::make(A, B, optreg::VectorXd::Constant(1, 1.0), x0);
}

inline bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

} // namespace helpers
