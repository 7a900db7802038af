#ifndef LORLAB_ODE_HPP
#define LORLAB_ODE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "lorlab/errors.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

using OdeRhs = std::function<Vec(double, const Vec&)>;

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 4000000;
};

// A single accepted integrator step; dense output is cubic Hermite on
// (y0,f0,y1,f1).
struct OdeStep {
    double t0, t1;
    Vec y0, y1, f0, f1;
};

class OdeSolution {
public:
    std::vector<OdeStep> steps;
    bool event_hit = false;
    double event_time = 0.0;

    double t_begin() const { return steps.front().t0; }
    double t_end() const { return steps.back().t1; }

    bool contains(double t) const {
        double a = t_begin(), b = t_end();
        return (a <= b) ? (t >= a - 1e-12 && t <= b + 1e-12)
                        : (t <= a + 1e-12 && t >= b - 1e-12);
    }

    const OdeStep& locate(double t) const {
        // Steps are monotone in t (forward or backward).
        bool fwd = t_end() >= t_begin();
        std::size_t lo = 0, hi = steps.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            bool after = fwd ? (t > steps[mid].t1) : (t < steps[mid].t1);
            if (after)
                lo = mid + 1;
            else
                hi = mid;
        }
        return steps[lo];
    }

    Vec eval(double t) const {
        const OdeStep& s = locate(t);
        double h = s.t1 - s.t0;
        if (h == 0.0) return s.y0;
        double u = (t - s.t0) / h;
        double u2 = u * u, u3 = u2 * u;
        double h00 = 2 * u3 - 3 * u2 + 1;
        double h10 = u3 - 2 * u2 + u;
        double h01 = -2 * u3 + 3 * u2;
        double h11 = u3 - u2;
        return h00 * s.y0 + (h10 * h) * s.f0 + h01 * s.y1 + (h11 * h) * s.f1;
    }

    Vec eval_derivative(double t) const {
        const OdeStep& s = locate(t);
        double h = s.t1 - s.t0;
        if (h == 0.0) return s.f0;
        double u = (t - s.t0) / h;
        double u2 = u * u;
        double d00 = (6 * u2 - 6 * u) / h;
        double d10 = 3 * u2 - 4 * u + 1;
        double d01 = (-6 * u2 + 6 * u) / h;
        double d11 = 3 * u2 - 2 * u;
        return d00 * s.y0 + d10 * s.f0 + d01 * s.y1 + d11 * s.f1;
    }
};

// Terminal event: integration stops where fn crosses zero.
struct OdeEvent {
    std::function<double(double, const Vec&)> fn;
    double location_tol = 1e-12;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

} // namespace detail

inline OdeSolution integrate_ode(const OdeRhs& rhs, double t0, const Vec& y0,
                                 double t1, const OdeOptions& opts = {},
                                 const std::optional<OdeEvent>& event = {}) {
    using D = detail::Dopri5;
    OdeSolution sol;
    double dir = (t1 >= t0) ? 1.0 : -1.0;
    double span = std::abs(t1 - t0);
    if (span == 0.0) {
        Vec f = rhs(t0, y0);
        sol.steps.push_back({t0, t0, y0, y0, f, f});
        return sol;
    }

    Vec y = y0;
    double t = t0;
    Vec f = rhs(t, y);
    double ev_prev = event ? event->fn(t, y) : 0.0;

    // Initial step guess.
    double h = std::min({span / 100.0, opts.max_step, 0.1});
    long nsteps = 0;

    auto err_norm = [&](const Vec& yn, const Vec& yerr) {
        double sum = 0.0;
        for (int i = 0; i < yn.size(); ++i) {
            double sc = opts.abs_tol +
                        opts.rel_tol * std::max(std::abs(y[i]), std::abs(yn[i]));
            double e = yerr[i] / sc;
            sum += e * e;
        }
        return std::sqrt(sum / yn.size());
    };

    double done_tol = 1e-13 * std::max(1.0, std::abs(t1));
    while (dir * (t1 - t) > done_tol) {
        if (++nsteps > opts.max_steps)
            throw StepUnderflow("step budget exhausted at t=" + std::to_string(t));
        h = std::min(h, opts.max_step);
        if (dir * (t + dir * h - t1) > 0.0) h = dir * (t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw StepUnderflow("step size underflow at t=" + std::to_string(t));

        double hs = dir * h;
        Vec k1 = f;
        Vec k2 = rhs(t + D::c2 * hs, y + hs * (D::a21 * k1));
        Vec k3 = rhs(t + D::c3 * hs, y + hs * (D::a31 * k1 + D::a32 * k2));
        Vec k4 =
            rhs(t + D::c4 * hs, y + hs * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
        Vec k5 = rhs(t + D::c5 * hs, y + hs * (D::a51 * k1 + D::a52 * k2 +
                                               D::a53 * k3 + D::a54 * k4));
        Vec k6 = rhs(t + hs, y + hs * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 +
                                       D::a64 * k4 + D::a65 * k5));
        Vec ynew = y + hs * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 +
                             D::b6 * k6);
        Vec k7 = rhs(t + hs, ynew);
        Vec yerr = hs * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 +
                         D::e6 * k6 + D::e7 * k7);

        double err = err_norm(ynew, yerr);
        if (err <= 1.0) {
            OdeStep step{t, t + hs, y, ynew, k1, k7};
            sol.steps.push_back(step);
            t += hs;
            y = ynew;
            f = k7; // FSAL

            if (event) {
                double ev = event->fn(t, y);
                if (ev_prev != 0.0 && ev * ev_prev < 0.0) {
                    // Bisection on the dense output of this step.
                    double lo = step.t0, hi = step.t1;
                    double flo = ev_prev;
                    for (int it = 0; it < 200 && std::abs(hi - lo) >
                                                     event->location_tol;
                         ++it) {
                        double mid = 0.5 * (lo + hi);
                        double fm = event->fn(mid, sol.eval(mid));
                        if (fm == 0.0) {
                            lo = hi = mid;
                            break;
                        }
                        if (fm * flo < 0.0)
                            hi = mid;
                        else {
                            lo = mid;
                            flo = fm;
                        }
                    }
                    double te = 0.5 * (lo + hi);
                    Vec ye = sol.eval(te);
                    Vec fe = rhs(te, ye);
                    sol.steps.back().t1 = te;
                    sol.steps.back().y1 = ye;
                    sol.steps.back().f1 = fe;
                    sol.event_hit = true;
                    sol.event_time = te;
                    return sol;
                }
                ev_prev = ev;
            }
        }
        // PI-ish step control.
        double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        fac = std::clamp(fac, 0.2, 5.0);
        h = h * fac;
    }
    if (!sol.steps.empty()) sol.steps.back().t1 = t1; // snap rounding residue
    return sol;
}

} // namespace lorlab

#endif
