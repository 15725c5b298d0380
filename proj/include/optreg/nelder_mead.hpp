#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "errors.hpp"

namespace optreg {

using Eigen::VectorXd;

/// Plain Nelder-Mead simplex search. Deterministic: no internal randomness,
/// ties broken by index. Used by the shooting solver, generic enough to live
/// on its own.
struct NelderMeadOptions {
    int max_evals = 400;
    double f_tol = 1e-12;      // stop when the simplex f-spread falls below this
    double x_tol = 1e-10;      // ... or the simplex diameter does
    double f_target = -1e300;  // stop early once best f <= target
    double init_step = 0.25;   // simplex edge length, per coordinate
    VectorXd init_steps;       // optional per-coordinate overrides
};

struct NelderMeadResult {
    VectorXd x;
    double f = 0.0;
    int evals = 0;
    bool converged = false; // tolerance hit (as opposed to budget exhausted)
};

inline NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& fn,
                                    const VectorXd& x0, const NelderMeadOptions& opt = {}) {
    const int n = static_cast<int>(x0.size());
    if (n == 0) throw InvalidArgument("nelder_mead needs at least one variable");

    const double alpha = 1.0, gamma = 2.0, beta = 0.5, sigma = 0.5;

    std::vector<VectorXd> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    NelderMeadResult out;

    auto eval = [&](const VectorXd& x) {
        ++out.evals;
        return fn(x);
    };

    for (int i = 0; i < n; ++i) {
        double step = opt.init_steps.size() == n ? opt.init_steps[i] : opt.init_step;
        xs[i + 1][i] += step;
    }
    for (int i = 0; i <= n; ++i) fs[i] = eval(xs[i]);

    std::vector<int> order(n + 1);
    auto sort_simplex = [&] {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fs[a] < fs[b]; });
        std::vector<VectorXd> xs2(n + 1);
        std::vector<double> fs2(n + 1);
        for (int i = 0; i <= n; ++i) {
            xs2[i] = xs[order[i]];
            fs2[i] = fs[order[i]];
        }
        xs.swap(xs2);
        fs.swap(fs2);
    };

    sort_simplex();
    while (out.evals < opt.max_evals) {
        if (fs[0] <= opt.f_target) {
            out.converged = true;
            break;
        }
        double diam = 0.0;
        for (int i = 1; i <= n; ++i) diam = std::max(diam, (xs[i] - xs[0]).norm());
        if (fs[n] - fs[0] <= opt.f_tol && diam <= opt.x_tol) {
            out.converged = true;
            break;
        }

        VectorXd centroid = VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += xs[i];
        centroid /= n;

        VectorXd xr = centroid + alpha * (centroid - xs[n]);
        double fr = eval(xr);
        if (fr < fs[0]) {
            VectorXd xe = centroid + gamma * (xr - centroid);
            double fe = eval(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            bool outside = fr < fs[n];
            VectorXd xc;
            if (outside)
                xc = centroid + beta * (xr - centroid);
            else
                xc = centroid - beta * (centroid - xs[n]);
            double fc = eval(xc);
            if (fc < std::min(fr, fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    xs[i] = xs[0] + sigma * (xs[i] - xs[0]);
                    fs[i] = eval(xs[i]);
                    if (out.evals >= opt.max_evals) break;
                }
            }
        }
        sort_simplex();
    }

    sort_simplex();
    out.x = xs[0];
    out.f = fs[0];
    return out;
}

} // namespace optreg
