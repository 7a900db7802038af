#ifndef LORLAB_GEODESIC_HPP
#define LORLAB_GEODESIC_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "lorlab/curvature.hpp"
#include "lorlab/errors.hpp"
#include "lorlab/metric.hpp"
#include "lorlab/ode.hpp"

namespace lorlab {

namespace detail {

inline DiffSide side_of(const MetricField& g, const Vec& x) {
    if (!(g.regularity == Regularity::C11 && g.interface_fn))
        return DiffSide::Auto;
    return g.interface_fn(x) >= 0.0 ? DiffSide::Plus : DiffSide::Minus;
}

// Geodesic right-hand side in the state y = (x, v).
inline Vec geodesic_rhs(const MetricField& g, const Vec& y, DiffSide side) {
    int n = g.dim;
    Vec x = y.head(n), v = y.tail(n);
    if (!g.in_chart(x)) throw LeftChart(g.name);
    Christoffel gam = christoffel(g, x, side);
    Vec out(2 * n);
    out.head(n) = v;
    for (int a = 0; a < n; ++a) out[n + a] = -v.dot(gam[a] * v);
    return out;
}

} // namespace detail

// Dense-output geodesic with interface-crossing events. Segments are split
// exactly at zeros of the interface field; velocity is continuous across
// events (geodesics of C11 metrics are C^1).
class GeodesicPath {
public:
    MetricField metric;
    double t_min = 0.0, t_max = 0.0;
    CausalClass causal_class = CausalClass::Timelike;
    std::vector<double> events;
    double tol = 1e-10;
    std::vector<OdeSolution> segments;

    Vec state(double t) const { return segment_for(t).eval(t); }
    Vec position(double t) const { return state(t).head(metric.dim); }
    Vec velocity(double t) const { return state(t).tail(metric.dim); }

    double norm_squared(double t) const {
        Vec x = position(t), v = velocity(t);
        return v.dot(metric.at(x) * v);
    }

    // Max drift of g(v,v) relative to its initial value, over m samples.
    double norm_drift(int m = 50) const {
        double q0 = norm_squared(t_min);
        double worst = 0.0;
        for (int i = 0; i <= m; ++i) {
            double t = t_min + (t_max - t_min) * i / m;
            worst = std::max(worst, std::abs(norm_squared(t) - q0));
        }
        return worst;
    }

    const OdeSolution& segment_for(double t) const {
        for (const auto& s : segments)
            if (s.contains(t)) return s;
        return (t <= t_min) == (t_min <= t_max) ? segments.front()
                                                : segments.back();
    }
};

inline GeodesicPath integrate_geodesic(const MetricField& g, const Vec& x0,
                                       const Vec& v0, double t0, double t1,
                                       double tol = 1e-10, int max_events = 64) {
    if (v0.norm() == 0.0) throw ZeroVector("integrate_geodesic");
    if (!g.in_chart(x0)) throw LeftChart("initial point outside chart");
    int n = g.dim;

    GeodesicPath path;
    path.metric = g;
    path.t_min = t0;
    path.t_max = t1;
    path.tol = tol;
    path.causal_class = classify_vector(g, x0, v0);

    OdeOptions opts;
    // The step-local tolerance is tightened by two orders so that the
    // accumulated global error honours the requested tol (the conserved
    // g(v,v) drift contract is global, not per-step).
    opts.rel_tol = std::max(tol * 1e-2, 5e-15);
    opts.abs_tol = std::max(tol * 1e-4, 1e-16);
    // Cap the step so the cubic-Hermite dense output stays well below tol
    // between steps (conserved-quantity drift is measured on dense samples).
    opts.max_step = std::abs(t1 - t0) / 64.0;

    Vec y(2 * n);
    y << x0, v0;
    double t = t0;
    bool has_interface = g.regularity == Regularity::C11 && bool(g.interface_fn);

    while (true) {
        DiffSide side = detail::side_of(g, y.head(n));
        OdeRhs rhs = [&g, side](double, const Vec& yy) {
            return detail::geodesic_rhs(g, yy, side);
        };
        std::optional<OdeEvent> ev;
        if (has_interface) {
            OdeEvent e;
            e.fn = [&g, n](double, const Vec& yy) {
                return g.interface_fn(yy.head(n));
            };
            e.location_tol = 1e-12;
            ev = e;
        }
        OdeSolution sol = integrate_ode(rhs, t, y, t1, opts, ev);
        path.segments.push_back(sol);
        if (!sol.event_hit) break;
        if ((int)path.events.size() >= max_events)
            throw EventLoop("more than max_events interface crossings");
        path.events.push_back(sol.event_time);
        y = sol.steps.back().y1;
        t = sol.event_time;
        // Nudge across the interface so the next segment starts on the far
        // side of the zero set.
        double h = 1e-11 * std::max(1.0, std::abs(t1 - t0));
        Vec f = sol.steps.back().f1;
        y += h * f;
        t += (t1 >= t0 ? h : -h);
    }
    return path;
}

// Parallel transport of vectors along a geodesic path: solves
// dV^a/dt = -Gamma^a_{bc} xdot^b V^c using the path's dense output.
inline std::vector<OdeSolution> parallel_transport(
    const GeodesicPath& path, const std::vector<Vec>& vectors, double t_from,
    double t_to) {
    const MetricField& g = path.metric;
    int n = g.dim;
    std::vector<OdeSolution> out;
    for (const Vec& V0 : vectors) {
        OdeRhs rhs = [&path, &g, n](double t, const Vec& V) {
            Vec x = path.position(t), xd = path.velocity(t);
            DiffSide side = detail::side_of(g, x);
            Christoffel gam = christoffel(g, x, side);
            Vec dv(n);
            for (int a = 0; a < n; ++a) dv[a] = -xd.dot(gam[a] * V);
            return dv;
        };
        OdeOptions opts;
        opts.rel_tol = path.tol;
        opts.abs_tol = path.tol * 1e-2;
        opts.max_step = std::abs(t_to - t_from) / 128.0;
        out.push_back(integrate_ode(rhs, t_from, V0, t_to, opts));
    }
    return out;
}

// Transport along an arbitrary parametrised curve (not necessarily geodesic).
inline OdeSolution transport_along_curve(
    const MetricField& g, const std::function<Vec(double)>& x_of_t,
    const std::function<Vec(double)>& xdot_of_t, const Vec& V0, double t_from,
    double t_to, double tol = 1e-10) {
    int n = g.dim;
    OdeRhs rhs = [&](double t, const Vec& V) {
        Vec x = x_of_t(t), xd = xdot_of_t(t);
        Christoffel gam = christoffel(g, x, detail::side_of(g, x));
        Vec dv(n);
        for (int a = 0; a < n; ++a) dv[a] = -xd.dot(gam[a] * V);
        return dv;
    };
    OdeOptions opts;
    opts.rel_tol = tol;
    opts.abs_tol = tol * 1e-2;
    opts.max_step = std::abs(t_to - t_from) / 128.0;
    return integrate_ode(rhs, t_from, V0, t_to, opts);
}

// Parallel orthonormal basis of the quotient [gamma-dot]^perp along a path.
// d = n-1 for timelike paths and n-2 for null paths; in the null case the
// companion N fixes the quotient representative via <gamma-dot, N> = -1.
class NormalFrame {
public:
    const GeodesicPath* path = nullptr;
    int d = 0;
    bool is_null = false;
    std::vector<OdeSolution> frame_transport; // one per frame vector
    std::optional<OdeSolution> companion_transport;

    std::vector<Vec> at(double t) const {
        std::vector<Vec> out;
        for (const auto& s : frame_transport) out.push_back(s.eval(t));
        return out;
    }
    Vec companion_at(double t) const { return companion_transport->eval(t); }
};

namespace detail {

inline Vec gs_project_timelike(const Mat& gm, const Vec& w, const Vec& u) {
    return w - (w.dot(gm * u) / u.dot(gm * u)) * u;
}

} // namespace detail

inline NormalFrame normal_frame(const GeodesicPath& path,
                                const std::vector<Vec>& seed,
                                std::optional<Vec> companion_seed = {}) {
    const MetricField& g = path.metric;
    int n = g.dim;
    double t0 = path.t_min;
    Vec x0 = path.position(t0), u = path.velocity(t0);
    Mat gm = g.at(x0);
    CausalClass cc = path.causal_class;

    NormalFrame nf;
    nf.path = &path;
    nf.is_null = (cc == CausalClass::Null);
    nf.d = nf.is_null ? n - 2 : n - 1;

    Vec N;
    if (nf.is_null) {
        if (companion_seed) {
            N = *companion_seed;
        } else {
            // Build N from the timelike frame leg: null, with <u,N> = -1.
            Vec T = orthonormal_frame_at(g, x0)[0];
            double uT = u.dot(gm * T);
            Vec N0 = T - (T.dot(gm * T) / (2.0 * uT)) * u;
            N = N0 / (-N0.dot(gm * u));
        }
        if (std::abs(N.dot(gm * u) + 1.0) > 1e-8)
            throw BadSeed("companion must satisfy <gamma-dot, N> = -1");
    }

    // Project the seeds into the orthogonal complement and orthonormalise.
    std::vector<Vec> basis;
    for (const Vec& w0 : seed) {
        if ((int)basis.size() == nf.d) break;
        Vec w = w0;
        if (nf.is_null) {
            w = w + w.dot(gm * N) * u + w.dot(gm * u) * N;
        } else {
            w = detail::gs_project_timelike(gm, w, u);
        }
        for (const Vec& e : basis) w -= w.dot(gm * e) * e;
        double q = w.dot(gm * w);
        if (q < 1e-16) continue;
        basis.push_back(Vec(w / std::sqrt(q)));
    }
    if ((int)basis.size() != nf.d)
        throw BadSeed("seed basis does not span the orthogonal complement");

    nf.frame_transport = parallel_transport(path, basis, t0, path.t_max);
    if (nf.is_null)
        nf.companion_transport =
            parallel_transport(path, {N}, t0, path.t_max)[0];
    return nf;
}

} // namespace lorlab

#endif
