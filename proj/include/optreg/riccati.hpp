#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "errors.hpp"
#include "linear_plant.hpp"

namespace optreg {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Quadratic regulator weights. The single knob rho scales the state
/// penalty against the control penalty:
///
///     Q_eff = rho * Qbar,   R_eff = Rbar,
///
/// with Qbar/Rbar defaulting to identities of the right size.
struct LqrWeights {
    double rho = 1.0;
    MatrixXd Qbar; // size 0 => identity(n_states)
    MatrixXd Rbar; // size 0 => identity(n_inputs)
};

struct RiccatiSolution {
    MatrixXd P;           // symmetric PSD solution of the algebraic Riccati equation
    MatrixXd G;           // gain, f = -G x
    double residual_norm; // Frobenius norm of A'P + PA - P S P + Q_eff
};

namespace detail {

// Frobenius norm of the Riccati residual.
inline double care_residual(const MatrixXd& A, const MatrixXd& S, const MatrixXd& Q,
                            const MatrixXd& P) {
    return (A.transpose() * P + P * A - P * S * P + Q).norm();
}

// One Newton-Kleinman step: solve the Lyapunov equation
//   (A - S P)' X + X (A - S P) = -(Q + P S P)
// by diagonalizing the closed-loop matrix.
inline MatrixXd newton_kleinman_step(const MatrixXd& A, const MatrixXd& S, const MatrixXd& Q,
                                     const MatrixXd& P) {
    const int n = static_cast<int>(A.rows());
    MatrixXd Acl = A - S * P;
    Eigen::ComplexEigenSolver<MatrixXd> eig(Acl);
    if (eig.info() != Eigen::Success)
        throw EigenFailure("eigensolver failed on the closed-loop matrix");
    const MatrixXcd& V = eig.eigenvectors();
    const VectorXcd& lam = eig.eigenvalues();

    MatrixXcd W = (Q + P * S * P).cast<std::complex<double>>();
    // Transform with V^T (not the adjoint): the Lyapunov identity
    // Lam Y + Y Lam = -V^T W V holds in these coordinates.
    MatrixXcd Wt = V.transpose() * W * V;
    MatrixXcd Y(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::complex<double> denom = lam[i] + lam[j];
            if (std::abs(denom) < 1e-14)
                throw SolverDivergence("closed-loop spectrum too close to the imaginary axis");
            Y(i, j) = -Wt(i, j) / denom;
        }

    // X = V^-T Y V^-1, using that Y is complex-symmetric.
    Eigen::FullPivLU<MatrixXcd> luT(MatrixXcd(V.transpose()));
    if (!luT.isInvertible())
        throw EigenFailure("closed-loop eigenvector basis is singular");
    MatrixXcd Z = luT.solve(Y).transpose(); // (V^-T Y)^T = Y V^-1
    MatrixXcd X = luT.solve(Z);             // V^-T Y V^-1
    MatrixXd Xr = X.real();
    return 0.5 * (Xr + Xr.transpose());
}

} // namespace detail

/// Solves the continuous algebraic Riccati equation
///
///     A' P + P A - P B R_eff^-1 B' P + Q_eff = 0
///
/// by the stable invariant subspace of the Hamiltonian, then polishes with
/// Newton-Kleinman iterations while they keep improving the residual.
/// Throws NotStabilizable when a non-stable mode of A is unreachable,
/// SolverDivergence or IndefiniteResult when no acceptable P exists.
inline RiccatiSolution solve_care(const LinearPlant& plant, const LqrWeights& weights = {}) {
    plant.validate();
    const int n = plant.n_states();
    const int p = plant.n_inputs();
    const MatrixXd& A = plant.A;
    const MatrixXd& B = plant.B;

    if (!(weights.rho > 0.0) || !std::isfinite(weights.rho))
        throw InvalidArgument("rho must be positive and finite, got " + std::to_string(weights.rho));
    MatrixXd Qbar = weights.Qbar.size() > 0 ? weights.Qbar : MatrixXd::Identity(n, n);
    MatrixXd Rbar = weights.Rbar.size() > 0 ? weights.Rbar : MatrixXd::Identity(p, p);
    if (Qbar.rows() != n || Qbar.cols() != n)
        throw DimensionMismatch("Qbar is " + std::to_string(Qbar.rows()) + "x" +
                                std::to_string(Qbar.cols()) + ", expected " +
                                std::to_string(n) + "x" + std::to_string(n));
    if (Rbar.rows() != p || Rbar.cols() != p)
        throw DimensionMismatch("Rbar is " + std::to_string(Rbar.rows()) + "x" +
                                std::to_string(Rbar.cols()) + ", expected " +
                                std::to_string(p) + "x" + std::to_string(p));
    if (!is_symmetric(Qbar))
        throw NonSymmetric("Qbar is not symmetric");
    if (!is_symmetric(Rbar))
        throw NonSymmetric("Rbar is not symmetric");
    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> qe(Qbar);
        if (qe.info() != Eigen::Success)
            throw EigenFailure("eigensolver failed on Qbar");
        if (qe.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Qbar.norm()))
            throw NotPositiveDefinite("Qbar must be positive semidefinite");
    }
    Eigen::LLT<MatrixXd> rllt(Rbar);
    if (rllt.info() != Eigen::Success)
        throw NotPositiveDefinite("Rbar must be positive definite");

    MatrixXd Q = weights.rho * Qbar;
    MatrixXd S = B * rllt.solve(B.transpose()); // B R^-1 B'
    S = 0.5 * (S + S.transpose()).eval();

    // PBH stabilizability: every eigenvalue of A in the closed right half
    // plane must keep [A - lambda I, B] at full row rank.
    {
        Eigen::ComplexEigenSolver<MatrixXd> ae(A);
        if (ae.info() != Eigen::Success)
            throw EigenFailure("eigensolver failed on A");
        double scale = std::max(1.0, A.norm());
        for (int k = 0; k < n; ++k) {
            std::complex<double> lam = ae.eigenvalues()[k];
            if (lam.real() < -1e-9 * scale) continue;
            MatrixXcd pencil(n, n + p);
            pencil.leftCols(n) = A.cast<std::complex<double>>() -
                                 lam * MatrixXcd::Identity(n, n);
            pencil.rightCols(p) = B.cast<std::complex<double>>();
            Eigen::JacobiSVD<MatrixXcd> svd(pencil);
            if (svd.singularValues()[n - 1] < 1e-9 * scale)
                throw NotStabilizable("mode at eigenvalue (" + std::to_string(lam.real()) + ", " +
                                      std::to_string(lam.imag()) + "i) is not reachable by any input");
        }
    }

    // Hamiltonian stable subspace.
    MatrixXd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = A;
    H.topRightCorner(n, n) = -S;
    H.bottomLeftCorner(n, n) = -Q;
    H.bottomRightCorner(n, n) = -A.transpose();

    Eigen::ComplexEigenSolver<MatrixXd> he(H);
    if (he.info() != Eigen::Success)
        throw EigenFailure("eigensolver failed on the Hamiltonian");

    MatrixXcd U1(n, n), U2(n, n);
    {
        int found = 0;
        for (int k = 0; k < 2 * n && found < n; ++k) {
            if (he.eigenvalues()[k].real() < 0.0) {
                U1.col(found) = he.eigenvectors().col(k).head(n);
                U2.col(found) = he.eigenvectors().col(k).tail(n);
                ++found;
            }
        }
        if (found != n)
            throw SolverDivergence("Hamiltonian spectrum does not split " + std::to_string(n) +
                                   "/" + std::to_string(n) + " across the imaginary axis");
    }

    // P = U2 U1^-1, forced symmetric.
    Eigen::FullPivLU<MatrixXcd> lu(U1.transpose());
    if (!lu.isInvertible())
        throw SolverDivergence("stable subspace is not a graph over the state space");
    MatrixXd P = lu.solve(U2.transpose()).transpose().real();
    P = 0.5 * (P + P.transpose()).eval();

    // Newton-Kleinman polish: always try one step, keep going while the
    // residual improves (up to four steps), keep the best iterate.
    double best_res = detail::care_residual(A, S, Q, P);
    for (int it = 0; it < 4; ++it) {
        MatrixXd Pn;
        try {
            Pn = detail::newton_kleinman_step(A, S, Q, P);
        } catch (const SolverError&) {
            break; // polish is best-effort; the subspace solution stands
        }
        double res = detail::care_residual(A, S, Q, Pn);
        if (!(res < best_res)) break;
        P = Pn;
        best_res = res;
        if (best_res < 1e-12 * std::max(1.0, P.norm())) break;
    }

    RiccatiSolution sol;
    sol.P = P;
    sol.G = rllt.solve(B.transpose() * P);
    sol.residual_norm = best_res;

    double pscale = std::max(1.0, P.norm());
    if (!(sol.residual_norm < 1e-8 * pscale))
        throw SolverDivergence("Riccati residual " + std::to_string(sol.residual_norm) +
                               " did not reach tolerance");
    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> pe(P);
        if (pe.info() != Eigen::Success)
            throw EigenFailure("eigensolver failed on P");
        if (pe.eigenvalues().minCoeff() < -1e-8 * pscale)
            throw IndefiniteResult("Riccati solution is not positive semidefinite");
    }
    {
        Eigen::ComplexEigenSolver<MatrixXd> ce(MatrixXd(A - B * sol.G));
        if (ce.info() != Eigen::Success)
            throw EigenFailure("eigensolver failed on the closed loop");
        if (ce.eigenvalues().real().maxCoeff() >= 0.0)
            throw SolverDivergence("closed loop A - B G is not Hurwitz");
    }
    return sol;
}

/// Unsaturated state feedback f = -G x.
inline VectorXd feedback(const RiccatiSolution& sol, const VectorXd& x) {
    if (x.size() != sol.G.cols())
        throw DimensionMismatch("state has " + std::to_string(x.size()) +
                                " entries, expected " + std::to_string(sol.G.cols()));
    return -sol.G * x;
}

/// Closed-form gain for the one-mode plant
///
///     x1' = x2,   x2' = -w^2 x1 - 2 z w x2 + c f
///
/// under J = int(delta1 x1^2 + delta2 x2^2 + gamma f^2). `gain` comes from
/// the Riccati route and is the one to trust; `formula_gain` evaluates the
/// textbook closed form as printed in its source, which goes non-finite for
/// light state weighting (negative radicand). `discrepancy` is set whenever
/// the two disagree beyond 1e-6 relative, and the formula value is reported
/// alongside rather than silently replaced.
struct SisoGainResult {
    Eigen::Vector2d gain;         // f = -gain . x (authoritative)
    Eigen::Vector2d formula_gain; // literal closed form, may be non-finite
    bool discrepancy = false;
    double rel_diff = 0.0;
};

inline SisoGainResult siso_analytic_gain(double omega, double zeta, double c,
                                         double delta1, double delta2, double gamma) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw InvalidArgument("omega must be positive");
    if (zeta < 0.0 || !std::isfinite(zeta))
        throw InvalidArgument("zeta must be non-negative");
    if (c == 0.0 || !std::isfinite(c))
        throw InvalidArgument("c must be nonzero and finite");
    if (!(delta1 > 0.0) || !(delta2 > 0.0) || !(gamma > 0.0))
        throw InvalidArgument("delta1, delta2, gamma must be positive");

    SisoGainResult out;

    // Literal closed form. Kept exactly as printed, warts and all.
    {
        double c0 = c * c / gamma;
        double c12 = -(omega * omega + std::sqrt(std::pow(omega, 4) + c0 * delta1)) / (2.0 * c0);
        double rad = zeta * zeta * omega * omega + (0.25 * delta2 + c12) * c0;
        double c2 = (-zeta * omega + std::sqrt(rad)) / c0;
        out.formula_gain = -(2.0 * c / gamma) * Eigen::Vector2d(c12, c2);
    }

    // Riccati route on the equivalent unit-control-weight plant:
    // Q = diag(delta1, delta2) / gamma, R = 1.
    {
        MatrixXd A(2, 2), B(2, 1);
        A << 0.0, 1.0, -omega * omega, -2.0 * zeta * omega;
        B << 0.0, c;
        LinearPlant plant{A, B, VectorXd::Constant(1, std::numeric_limits<double>::infinity()),
                          VectorXd::Zero(2)};
        LqrWeights w;
        w.rho = 1.0;
        w.Qbar = Eigen::Vector2d(delta1 / gamma, delta2 / gamma).asDiagonal();
        RiccatiSolution sol = solve_care(plant, w);
        out.gain = sol.G.row(0).transpose();
    }

    double denom = std::max(1.0, out.gain.norm());
    out.rel_diff = (out.formula_gain - out.gain).norm() / denom;
    out.discrepancy = !out.formula_gain.allFinite() || out.rel_diff > 1e-6;
    return out;
}

} // namespace optreg
