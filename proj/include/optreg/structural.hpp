#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linear_plant.hpp"

namespace optreg {

/// Second-order structural model
///
///     M u'' + E u' + K u = D f
///
/// with symmetric positive definite M and K. Damping is given either as a
/// physical matrix E (projected onto the modes, off-diagonal coupling
/// discarded) or as per-mode ratios; at most one of the two.
struct StructuralModel {
    MatrixXd M;             // n_dof x n_dof, SPD
    MatrixXd K;             // n_dof x n_dof, SPD
    MatrixXd E;             // n_dof x n_dof physical damping, size 0 if absent
    VectorXd modal_damping; // per-mode ratios, size 0 if absent
    MatrixXd D;             // n_dof x n_inputs load distribution
    int n_modes = 0;        // modes to keep, 0 => all

    int n_dof() const { return static_cast<int>(M.rows()); }
    int n_kept() const { return n_modes > 0 ? n_modes : n_dof(); }

    void validate() const {
        if (M.rows() == 0 || M.rows() != M.cols())
            throw DimensionMismatch("M must be square and non-empty, got " +
                                    std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
        if (K.rows() != M.rows() || K.cols() != M.cols())
            throw DimensionMismatch("K is " + std::to_string(K.rows()) + "x" +
                                    std::to_string(K.cols()) + ", expected " +
                                    std::to_string(M.rows()) + "x" + std::to_string(M.rows()));
        if (!is_symmetric(M))
            throw NonSymmetric("M is not symmetric");
        if (!is_symmetric(K))
            throw NonSymmetric("K is not symmetric");
        if (E.size() > 0) {
            if (E.rows() != M.rows() || E.cols() != M.cols())
                throw DimensionMismatch("E is " + std::to_string(E.rows()) + "x" +
                                        std::to_string(E.cols()) + ", expected " +
                                        std::to_string(M.rows()) + "x" + std::to_string(M.rows()));
            if (!is_symmetric(E))
                throw NonSymmetric("E is not symmetric");
        }
        if (E.size() > 0 && modal_damping.size() > 0)
            throw InvalidArgument("give either a damping matrix E or modal damping ratios, not both");
        if (D.rows() != M.rows())
            throw DimensionMismatch("D has " + std::to_string(D.rows()) +
                                    " rows, expected " + std::to_string(M.rows()));
        if (D.cols() == 0)
            throw DimensionMismatch("D must have at least one column");
        if (n_modes < 0 || n_modes > n_dof())
            throw InvalidArgument("n_modes must lie in [0, " + std::to_string(n_dof()) +
                                  "], got " + std::to_string(n_modes));
        if (!M.allFinite() || !K.allFinite() || !D.allFinite() ||
            (E.size() > 0 && !E.allFinite()) ||
            (modal_damping.size() > 0 && !modal_damping.allFinite()))
            throw InvalidArgument("model matrices contain non-finite entries");
    }
};

/// Result of the generalized eigenproblem K phi = omega^2 M phi.
struct ModalData {
    VectorXd frequencies;    // rad/s, ascending, one per kept mode
    MatrixXd mode_shapes;    // n_dof x n_kept, mass-normalized columns
    VectorXd damping_ratios; // one per kept mode
    std::vector<std::string> warnings;

    int n_kept() const { return static_cast<int>(frequencies.size()); }
};

namespace detail {

// Resolve per-mode damping ratios from whatever the model carries.
inline VectorXd damping_for_modes(const StructuralModel& model, const ModalData& modal) {
    const int n = modal.n_kept();
    if (model.modal_damping.size() > 0) {
        const VectorXd& z = model.modal_damping;
        VectorXd out(n);
        if (z.size() == 1) {
            out.setConstant(z[0]);
        } else if (z.size() >= n) {
            out = z.head(n);
        } else {
            throw DimensionMismatch("modal_damping has " + std::to_string(z.size()) +
                                    " entries, expected " + std::to_string(n) + " (or 1 to broadcast)");
        }
        for (int i = 0; i < n; ++i)
            if (out[i] < 0.0)
                throw InvalidArgument("modal_damping[" + std::to_string(i) + "] is negative");
        return out;
    }
    return VectorXd::Zero(n);
}

} // namespace detail

/// Solves the generalized symmetric eigenproblem through a Cholesky split
/// M = L L^T, mass-normalizes the shapes, and keeps the lowest n_modes.
/// Damping from a physical E is projected mode by mode; coupling that the
/// projection throws away is reported as a warning when the off-diagonal
/// mass exceeds 1e-6 relative.
inline ModalData modal_decompose(const StructuralModel& model) {
    model.validate();
    const int n_dof = model.n_dof();
    const int n = model.n_kept();

    Eigen::LLT<MatrixXd> llt(model.M);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("M is not positive definite");
    MatrixXd L = llt.matrixL();

    // Ktil = L^-1 K L^-T, symmetrized against roundoff.
    MatrixXd Ktil = L.triangularView<Eigen::Lower>().solve(model.K);
    Ktil = L.triangularView<Eigen::Lower>().solve(Ktil.transpose()).eval();
    Ktil = 0.5 * (Ktil + Ktil.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Ktil);
    if (eig.info() != Eigen::Success)
        throw EigenFailure("symmetric eigensolver failed on the reduced stiffness");

    VectorXd lam = eig.eigenvalues(); // ascending
    double kscale = std::max(1.0, Ktil.norm());
    for (int i = 0; i < n_dof; ++i)
        if (lam[i] <= 1e-12 * kscale)
            throw NotPositiveDefinite("K is not positive definite (pencil eigenvalue " +
                                      std::to_string(lam[i]) + " at mode " + std::to_string(i) + ")");

    // Back-substitute to physical shapes: phi = L^-T v. These come out
    // mass-normalized because the v are orthonormal.
    MatrixXd phi_full = L.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors());

    ModalData modal;
    modal.frequencies = lam.head(n).array().sqrt();
    modal.mode_shapes = phi_full.leftCols(n);

    // Fix signs so the largest-magnitude entry of each shape is positive.
    for (int j = 0; j < n; ++j) {
        int imax = 0;
        modal.mode_shapes.col(j).cwiseAbs().maxCoeff(&imax);
        if (modal.mode_shapes(imax, j) < 0.0) modal.mode_shapes.col(j) *= -1.0;
    }

    if (model.E.size() > 0) {
        MatrixXd Ebar = modal.mode_shapes.transpose() * model.E * modal.mode_shapes;
        double diag_scale = std::max(1.0, Ebar.diagonal().norm());
        double offdiag = (Ebar - MatrixXd(Ebar.diagonal().asDiagonal())).norm();
        if (offdiag > 1e-6 * diag_scale)
            modal.warnings.push_back(
                "damping projection discards modal coupling (relative off-diagonal mass " +
                std::to_string(offdiag / diag_scale) + ")");
        modal.damping_ratios.resize(n);
        for (int i = 0; i < n; ++i) {
            double zeta = Ebar(i, i) / (2.0 * modal.frequencies[i]);
            if (zeta < -1e-12)
                throw InvalidArgument("projected damping is negative at mode " + std::to_string(i));
            modal.damping_ratios[i] = std::max(0.0, zeta);
        }
    } else {
        modal.damping_ratios = detail::damping_for_modes(model, modal);
    }

    // The orthonormality this routine promises; cheap enough to always check.
    double err_m = (modal.mode_shapes.transpose() * model.M * modal.mode_shapes -
                    MatrixXd::Identity(n, n)).norm();
    MatrixXd kproj = modal.mode_shapes.transpose() * model.K * modal.mode_shapes;
    kproj.diagonal() -= modal.frequencies.array().square().matrix();
    double err_k = kproj.norm() / std::max(1.0, modal.frequencies.array().square().matrix().norm());
    if (err_m > 1e-8 || err_k > 1e-8)
        throw EigenFailure("mode shapes failed the orthonormality check (M: " +
                           std::to_string(err_m) + ", K: " + std::to_string(err_k) + ")");

    return modal;
}

/// Assembles the modal state space
///
///     d/dt [eta; eta'] = [0 I; -diag(w^2) -diag(2 zeta w)] [eta; eta']
///                        + [0; Phi^T D] f
///
/// with the given modal initial condition (size 2 n_kept: displacements then
/// velocities).
inline LinearPlant to_state_space(const StructuralModel& model, const ModalData& modal,
                                  const VectorXd& eta0, const VectorXd& force_bounds) {
    const int n = modal.n_kept();
    const int p = static_cast<int>(model.D.cols());
    if (eta0.size() != 2 * n)
        throw DimensionMismatch("modal initial state has " + std::to_string(eta0.size()) +
                                " entries, expected " + std::to_string(2 * n));
    VectorXd zeta = modal.damping_ratios.size() == n ? modal.damping_ratios
                                                     : detail::damping_for_modes(model, modal);

    MatrixXd A = MatrixXd::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n).setIdentity();
    A.bottomLeftCorner(n, n).diagonal() = -modal.frequencies.array().square();
    A.bottomRightCorner(n, n).diagonal() = -2.0 * zeta.array() * modal.frequencies.array();

    MatrixXd B = MatrixXd::Zero(2 * n, p);
    B.bottomRows(n) = modal.mode_shapes.transpose() * model.D;

    return LinearPlant::make(std::move(A), std::move(B), force_bounds, eta0);
}

/// Same, but the initial condition is physical: either displacements alone
/// (size n_dof, zero velocity) or displacements stacked on velocities
/// (size 2 n_dof). Projection onto the kept modes is eta = Phi^T M u.
inline LinearPlant to_state_space_physical(const StructuralModel& model, const ModalData& modal,
                                           const VectorXd& u0, const VectorXd& force_bounds) {
    const int n_dof = model.n_dof();
    const int n = modal.n_kept();
    VectorXd disp, vel;
    if (u0.size() == n_dof) {
        disp = u0;
        vel = VectorXd::Zero(n_dof);
    } else if (u0.size() == 2 * n_dof) {
        disp = u0.head(n_dof);
        vel = u0.tail(n_dof);
    } else {
        throw DimensionMismatch("physical initial state has " + std::to_string(u0.size()) +
                                " entries, expected " + std::to_string(n_dof) + " or " +
                                std::to_string(2 * n_dof));
    }
    VectorXd eta0(2 * n);
    eta0.head(n) = modal.mode_shapes.transpose() * model.M * disp;
    eta0.tail(n) = modal.mode_shapes.transpose() * model.M * vel;
    return to_state_space(model, modal, eta0, force_bounds);
}

/// Collocated rate output C = B^T: each row senses the modal velocities
/// through the same distribution its actuator pushes on.
inline MatrixXd output_matrix(const LinearPlant& plant) {
    return plant.B.transpose();
}

/// User-supplied output map, validated against the plant dimensions.
inline MatrixXd output_matrix(const LinearPlant& plant, const MatrixXd& C) {
    if (C.cols() != plant.n_states())
        throw DimensionMismatch("output matrix has " + std::to_string(C.cols()) +
                                " columns, expected " + std::to_string(plant.n_states()));
    if (C.rows() == 0)
        throw DimensionMismatch("output matrix must have at least one row");
    if (!C.allFinite())
        throw InvalidArgument("output matrix contains non-finite entries");
    return C;
}

} // namespace optreg
