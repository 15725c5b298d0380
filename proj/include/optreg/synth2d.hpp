#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linear_plant.hpp"

namespace optreg {

/// Two-state one-control plant in decoupled left-eigenvector coordinates
/// y = E x:
///
///     y_i' = lambda_i y_i + b_i u,   |u| <= xi,
///
/// with real, distinct, nonzero eigenvalues lambda1 < lambda2 and both
/// b_i nonzero. The synthesis below works on the rescaled coordinates
/// ytil_i = y_i / (b_i xi), in which the dynamics read
/// ytil_i' = lambda_i ytil_i + u/xi with |u/xi| <= 1.
struct CanonicalSystem2 {
    double lambda1 = 0.0; // smaller eigenvalue
    double lambda2 = 0.0; // larger eigenvalue
    double b1 = 0.0;      // E B, first row
    double b2 = 0.0;
    double xi = 0.0;      // control bound
    Eigen::Matrix2d E;    // rows are unit left eigenvectors
    Eigen::Matrix2d E_inv;
    double cond_E = 0.0;
};

/// Axis-aligned unrecoverable bands: |y_axis| >= threshold (canonical
/// coordinates) cannot be brought back with |u| <= xi.
struct InstabilityRegion {
    struct Band {
        int axis;         // 0 or 1
        double threshold; // |b_i| xi / lambda_i
    };
    std::vector<Band> bands;

    bool empty() const { return bands.empty(); }

    bool contains(const Eigen::Vector2d& y) const {
        for (const Band& b : bands)
            if (std::abs(y[b.axis]) >= b.threshold) return true;
        return false;
    }

    std::string describe() const {
        if (bands.empty()) return "none (every state is recoverable)";
        std::string s;
        for (const Band& b : bands) {
            if (!s.empty()) s += "; ";
            char buf[64];
            std::snprintf(buf, sizeof buf, "|y%d| >= %.12g", b.axis + 1, b.threshold);
            s += buf;
        }
        return s;
    }
};

struct Synthesis2D {
    CanonicalSystem2 system;
    InstabilityRegion region;
};

/// Diagonalizes a 2-state single-input plant by its left eigenvectors.
/// Throws the named hypothesis violation when the eigenvalues are complex,
/// repeated, or zero, and NotStabilizable when the control misses a mode.
inline CanonicalSystem2 canonicalize(const LinearPlant& plant) {
    plant.validate();
    if (plant.n_states() != 2 || plant.n_inputs() != 1)
        throw DimensionMismatch("second-order synthesis needs 2 states and 1 input, got " +
                                std::to_string(plant.n_states()) + " states and " +
                                std::to_string(plant.n_inputs()) + " inputs");
    double xi = plant.force_bounds[0];
    if (!std::isfinite(xi))
        throw InvalidArgument("second-order synthesis needs a finite force bound");

    const Eigen::Matrix2d A = plant.A;
    const double tr = A(0, 0) + A(1, 1);
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    const double disc = tr * tr - 4.0 * det;
    const double scale2 = std::max({1.0, tr * tr, std::abs(det)});
    if (disc < -1e-12 * scale2)
        throw ComplexEigenvalues("eigenvalues form a complex pair (discriminant " +
                                 std::to_string(disc) + ")");
    if (disc <= 1e-12 * scale2)
        throw RepeatedEigenvalues("eigenvalues coincide (discriminant " +
                                  std::to_string(disc) + ")");
    const double root = std::sqrt(disc);
    double lam1 = 0.5 * (tr - root);
    double lam2 = 0.5 * (tr + root);
    const double lscale = std::max({1.0, std::abs(lam1), std::abs(lam2)});
    if (std::abs(lam1) <= 1e-12 * lscale || std::abs(lam2) <= 1e-12 * lscale)
        throw ZeroEigenvalue("an eigenvalue sits at the origin; the arcs degenerate");

    // Left eigenvector for lam: e (A - lam I) = 0. Two closed-form choices;
    // pick the better-conditioned one.
    auto left_row = [&](double lam) {
        Eigen::RowVector2d cand1(A(1, 0), lam - A(0, 0));
        Eigen::RowVector2d cand2(lam - A(1, 1), A(0, 1));
        Eigen::RowVector2d e = cand1.norm() >= cand2.norm() ? cand1 : cand2;
        if (e.norm() < 1e-14 * lscale)
            throw EigenFailure("left eigenvector degenerated at eigenvalue " + std::to_string(lam));
        e /= e.norm();
        // Deterministic sign: largest-magnitude entry positive.
        int imax = std::abs(e[0]) >= std::abs(e[1]) ? 0 : 1;
        if (e[imax] < 0.0) e = -e;
        return e;
    };

    CanonicalSystem2 sys;
    sys.lambda1 = lam1;
    sys.lambda2 = lam2;
    sys.xi = xi;
    sys.E.row(0) = left_row(lam1);
    sys.E.row(1) = left_row(lam2);

    Eigen::JacobiSVD<Eigen::Matrix2d> svd(sys.E);
    double smin = svd.singularValues()[1];
    if (smin < 1e-12)
        throw EigenFailure("left eigenvector rows are (nearly) parallel");
    sys.cond_E = svd.singularValues()[0] / smin;
    sys.E_inv = sys.E.inverse();

    Eigen::Vector2d b = sys.E * plant.B.col(0);
    double bscale = std::max(1.0, plant.B.col(0).norm());
    if (std::abs(b[0]) < 1e-12 * bscale || std::abs(b[1]) < 1e-12 * bscale)
        throw NotStabilizable("control does not reach both canonical modes (b = [" +
                              std::to_string(b[0]) + ", " + std::to_string(b[1]) + "])");
    sys.b1 = b[0];
    sys.b2 = b[1];
    return sys;
}

namespace detail {

inline Eigen::Vector2d rescale(const CanonicalSystem2& sys, const Eigen::Vector2d& y) {
    return {y[0] / (sys.b1 * sys.xi), y[1] / (sys.b2 * sys.xi)};
}

// Final-arc curve in rescaled coordinates: the locus steered to the origin
// with u = -xi sign(ytil1) held constant.
inline double curve_ordinate(const CanonicalSystem2& sys, double yt1) {
    if (yt1 == 0.0) return 0.0;
    const double l1 = sys.lambda1, l2 = sys.lambda2;
    const double sgn = yt1 > 0.0 ? 1.0 : -1.0;
    const double base = 1.0 - l1 * sgn * yt1;
    if (base <= 0.0)
        throw DomainError("state outside the one-arc domain (|ytil1| >= 1/lambda1)");
    return (sgn / l2) * (1.0 - std::pow(base, l2 / l1));
}

} // namespace detail

/// Signed distance-like switching value s(y) = ytil2 - Gamma(ytil1) in the
/// rescaled coordinates; zero exactly on the final-arc curve.
inline double switching_function(const CanonicalSystem2& sys, const Eigen::Vector2d& y) {
    Eigen::Vector2d yt = detail::rescale(sys, y);
    return yt[1] - detail::curve_ordinate(sys, yt[0]);
}

/// Unrecoverable bands: an unstable mode with |y_i| >= |b_i| xi / lambda_i
/// outruns any admissible control.
inline InstabilityRegion instability_region(const CanonicalSystem2& sys) {
    InstabilityRegion region;
    if (sys.lambda1 > 0.0)
        region.bands.push_back({0, std::abs(sys.b1) * sys.xi / sys.lambda1});
    if (sys.lambda2 > 0.0)
        region.bands.push_back({1, std::abs(sys.b2) * sys.xi / sys.lambda2});
    return region;
}

/// Time-optimal feedback in canonical coordinates: full positive or negative
/// force depending on the side of the switching curve, riding the curve
/// (u = -xi sign(ytil1)) inside a narrow hysteresis band so chatter does not
/// flip on roundoff. Throws OutsideStabilityRegion when no admissible
/// control can recover.
inline double feedback2d(const CanonicalSystem2& sys, const Eigen::Vector2d& y,
                         double hysteresis = 1e-9) {
    if (sys.lambda1 > 0.0 &&
        std::abs(y[0]) >= std::abs(sys.b1) * sys.xi / sys.lambda1)
        throw OutsideStabilityRegion("mode 1 is past its recoverable band");
    if (sys.lambda2 > 0.0 &&
        std::abs(y[1]) >= std::abs(sys.b2) * sys.xi / sys.lambda2)
        throw OutsideStabilityRegion("mode 2 is past its recoverable band");
    Eigen::Vector2d yt = detail::rescale(sys, y);
    double s = yt[1] - detail::curve_ordinate(sys, yt[0]);
    if (std::abs(s) <= hysteresis) {
        double sgn1 = yt[0] >= 0.0 ? 1.0 : -1.0;
        return -sys.xi * sgn1;
    }
    return s > 0.0 ? -sys.xi : sys.xi;
}

/// Feedback evaluated on a physical state: y = E x.
inline double feedback2d_state(const Synthesis2D& synth, const Eigen::Vector2d& x,
                               double hysteresis = 1e-9) {
    return feedback2d(synth.system, synth.system.E * x, hysteresis);
}

/// Exact constant-control arc in canonical coordinates:
///
///     y_i(t) = (y_i(0) + b_i u / lambda_i) e^(lambda_i t) - b_i u / lambda_i.
inline Eigen::Vector2d trajectory_arc(const CanonicalSystem2& sys, const Eigen::Vector2d& y0,
                                      double u, double t) {
    if (!std::isfinite(u) || std::abs(u) > sys.xi * (1.0 + 1e-12))
        throw InvalidArgument("arc control must satisfy |u| <= xi");
    if (!std::isfinite(t))
        throw InvalidArgument("arc time must be finite");
    auto coord = [&](double y, double lam, double b) {
        double drift = b * u / lam;
        return (y + drift) * std::exp(lam * t) - drift;
    };
    return {coord(y0[0], sys.lambda1, sys.b1), coord(y0[1], sys.lambda2, sys.b2)};
}

inline Synthesis2D synthesize(const LinearPlant& plant) {
    Synthesis2D synth;
    synth.system = canonicalize(plant);
    synth.region = instability_region(synth.system);
    return synth;
}

/// Uniform samples (y1, y2) of the switching curve in canonical coordinates,
/// clipped to the one-arc domain when mode 1 is unstable.
inline std::vector<std::pair<double, double>> switching_curve_samples(
    const CanonicalSystem2& sys, int count, double y1_half_span) {
    if (count < 2) throw InvalidArgument("need at least 2 curve samples");
    if (!(y1_half_span > 0.0)) throw InvalidArgument("curve span must be positive");
    double span = y1_half_span;
    if (sys.lambda1 > 0.0) {
        double limit = 0.999 * std::abs(sys.b1) * sys.xi / sys.lambda1;
        span = std::min(span, limit);
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        double y1 = -span + 2.0 * span * k / (count - 1);
        double yt1 = y1 / (sys.b1 * sys.xi);
        double yt2 = detail::curve_ordinate(sys, yt1);
        pts.emplace_back(y1, yt2 * sys.b2 * sys.xi);
    }
    return pts;
}

} // namespace optreg
