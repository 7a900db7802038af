#ifndef LORLAB_METRIC_HPP
#define LORLAB_METRIC_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorlab/errors.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

struct SpacetimePoint {
    std::string chart_id;
    Vec coords;
};

enum class Regularity { Smooth, C11 };

enum class CausalClass { Timelike, Null, Spacelike };

// Chart-local Lorentzian metric with signature (-,+,...,+). Components are
// given as a matrix-valued function of the chart coordinates; an analytic
// coordinate-derivative map may be supplied, otherwise central finite
// differences are used. C11 metrics may declare a scalar interface field
// whose zero set is the non-smoothness locus.
struct MetricField {
    int dim = 0;
    Regularity regularity = Regularity::Smooth;
    std::function<Mat(const Vec&)> components;
    // derivative(x)[c] = d g_ab / d x^c  (optional)
    std::function<std::vector<Mat>(const Vec&)> derivative;
    // Non-smoothness locus Phi(x) = 0 (only for C11 metrics).
    std::function<double(const Vec&)> interface_fn;
    double chart_scale = 1.0;
    // Optional coordinate box the chart is valid on (empty = unbounded).
    std::vector<std::pair<double, double>> chart_bounds;
    // Index of a periodic coordinate, with its period (e.g. the cylinder).
    int periodic_coord = -1;
    double period = 0.0;
    std::string name = "custom";

    Mat at(const Vec& x) const { return components(x); }

    bool in_chart(const Vec& x) const {
        if (!x.allFinite()) return false;
        for (std::size_t c = 0; c < chart_bounds.size(); ++c) {
            if ((int)c == periodic_coord) continue;
            if (x[c] < chart_bounds[c].first || x[c] > chart_bounds[c].second)
                return false;
        }
        return true;
    }

    double interface_distance(const Vec& x) const {
        return interface_fn ? std::abs(interface_fn(x))
                            : std::numeric_limits<double>::infinity();
    }
};

// Classification tolerance is relative to the squared h-norm of v, with h the
// background Riemannian metric (Euclidean in chart coordinates by default).
inline CausalClass classify_vector(const MetricField& g, const Vec& x,
                                   const Vec& v, double tau_null = 1e-10) {
    if (v.norm() == 0.0) throw ZeroVector("classify_vector");
    double q = v.dot(g.at(x) * v);
    double scale = tau_null * v.squaredNorm();
    if (q < -scale) return CausalClass::Timelike;
    if (q > scale) return CausalClass::Spacelike;
    return CausalClass::Null;
}

// ---------------------------------------------------------------------------
// Metric catalog
// ---------------------------------------------------------------------------

inline MetricField minkowski(int n = 4) {
    MetricField g;
    g.dim = n;
    g.name = "minkowski";
    Mat eta = Mat::Identity(n, n);
    eta(0, 0) = -1.0;
    g.components = [eta](const Vec&) { return eta; };
    g.derivative = [n](const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, n)); };
    return g;
}

// Flat 1+1 cylinder -dt^2 + dtheta^2, theta periodic with period 2*pi.
inline MetricField einstein_cylinder() {
    MetricField g = minkowski(2);
    g.name = "einstein_cylinder";
    g.periodic_coord = 1;
    g.period = 2.0 * M_PI;
    return g;
}

// Constant-curvature model in a conformally flat chart,
//   g = eta / (1 - (K/4) eta(x,x))^2.
// Normalisation: for K > 0 the tidal operator along a unit timelike geodesic
// is +K * id (Jacobi fields oscillate, period pi/sqrt(K)). The chart covers
// proper time < pi/sqrt(K) along the central geodesic; use
// space_form_static2d for experiments that must reach the focal parameter.
inline MetricField space_form(double K, int n = 4) {
    MetricField g;
    g.dim = n;
    g.name = "space_form";
    auto eta_quad = [n](const Vec& x) {
        double q = -x[0] * x[0];
        for (int i = 1; i < n; ++i) q += x[i] * x[i];
        return q;
    };
    Mat eta = Mat::Identity(n, n);
    eta(0, 0) = -1.0;
    g.components = [eta, eta_quad, K](const Vec& x) {
        double F = 1.0 - 0.25 * K * eta_quad(x);
        return Mat((1.0 / (F * F)) * eta);
    };
    g.derivative = [eta, eta_quad, K, n](const Vec& x) {
        double F = 1.0 - 0.25 * K * eta_quad(x);
        std::vector<Mat> d(n);
        for (int c = 0; c < n; ++c) {
            double dq = (c == 0) ? -2.0 * x[0] : 2.0 * x[c];
            double dF = -0.25 * K * dq;
            d[c] = (-2.0 / (F * F * F)) * dF * eta;
        }
        return d;
    };
    // Chart ends where the conformal factor blows up.
    g.chart_scale = 1.0;
    return g;
}

// 1+1 constant-curvature chart g = -(1+K x^2) dt^2 + dx^2/(1+K x^2).
// For K > 0 every timelike geodesic through the origin refocuses at
// (t, x) = (pi/sqrt(K), 0), so the cut parameter of the unit vector
// d_t at the origin is pi/sqrt(K).
inline MetricField space_form_static2d(double K) {
    MetricField g;
    g.dim = 2;
    g.name = "space_form_static2d";
    g.components = [K](const Vec& x) {
        double f = 1.0 + K * x[1] * x[1];
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = -f;
        m(1, 1) = 1.0 / f;
        return m;
    };
    g.derivative = [K](const Vec& x) {
        double f = 1.0 + K * x[1] * x[1];
        double df = 2.0 * K * x[1];
        std::vector<Mat> d(2, Mat::Zero(2, 2));
        d[1](0, 0) = -df;
        d[1](1, 1) = -df / (f * f);
        return d;
    };
    if (K < 0.0)
        g.chart_bounds = {{-1e30, 1e30},
                          {-0.99 / std::sqrt(-K), 0.99 / std::sqrt(-K)}};
    else if (K > 0.0)
        // Null geodesics reach spatial infinity in finite coordinate time
        // (t asymptotes while x runs away linearly in the affine parameter);
        // bounding the chart lets cone boundaries terminate at a finite
        // affine parameter instead of stalling below the asymptote.
        g.chart_bounds = {{-1e30, 1e30},
                          {-30.0 / std::sqrt(K), 30.0 / std::sqrt(K)}};
    return g;
}

// Schwarzschild exterior in (t, r, theta, phi), geometric units.
inline MetricField schwarzschild(double M = 1.0) {
    MetricField g;
    g.dim = 4;
    g.name = "schwarzschild";
    g.components = [M](const Vec& x) {
        double r = x[1], th = x[2];
        double f = 1.0 - 2.0 * M / r;
        Mat m = Mat::Zero(4, 4);
        m(0, 0) = -f;
        m(1, 1) = 1.0 / f;
        m(2, 2) = r * r;
        double s = std::sin(th);
        m(3, 3) = r * r * s * s;
        return m;
    };
    g.derivative = [M](const Vec& x) {
        double r = x[1], th = x[2];
        double f = 1.0 - 2.0 * M / r;
        double df = 2.0 * M / (r * r);
        std::vector<Mat> d(4, Mat::Zero(4, 4));
        d[1](0, 0) = -df;
        d[1](1, 1) = -df / (f * f);
        d[1](2, 2) = 2.0 * r;
        double s = std::sin(th), c = std::cos(th);
        d[1](3, 3) = 2.0 * r * s * s;
        d[2](3, 3) = r * r * 2.0 * s * c;
        return d;
    };
    g.chart_bounds = {{-1e30, 1e30}, {2.0 * M * 1.02, 1e30}, {0.02, M_PI - 0.02},
                      {-1e30, 1e30}};
    g.chart_scale = M;
    return g;
}

// 1+1 matched C11 metric with g_xx = (1 + beta * x|x|)^2: the components are
// C^1 across x = 0 with Lipschitz first derivatives, the curvature jumps.
inline MetricField matched_metric(double beta = 0.5) {
    MetricField g;
    g.dim = 2;
    g.name = "matched";
    g.regularity = Regularity::C11;
    g.interface_fn = [](const Vec& x) { return x[1]; };
    g.components = [beta](const Vec& x) {
        double s = x[1] * std::abs(x[1]);
        double p = 1.0 + beta * s;
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = -1.0;
        m(1, 1) = p * p;
        return m;
    };
    g.derivative = [beta](const Vec& x) {
        double s = x[1] * std::abs(x[1]);
        double p = 1.0 + beta * s;
        double dp = beta * 2.0 * std::abs(x[1]);
        std::vector<Mat> d(2, Mat::Zero(2, 2));
        d[1](1, 1) = 2.0 * p * dp;
        return d;
    };
    g.chart_bounds = {{-1e30, 1e30}, {-1.0, 1.0}};
    return g;
}

// Scale-factor forms for the contracting toy metric.
struct ScaleFactor {
    std::function<double(double)> a, adot, addot;
};

inline ScaleFactor scale_factor_linear(double a0, double a1) {
    return {[=](double t) { return a0 + a1 * t; },
            [=](double) { return a1; }, [](double) { return 0.0; }};
}

inline ScaleFactor scale_factor_cosh() {
    return {[](double t) { return std::cosh(t); },
            [](double t) { return std::sinh(t); },
            [](double t) { return std::cosh(t); }};
}

inline ScaleFactor scale_factor_exp(double h) {
    return {[=](double t) { return std::exp(h * t); },
            [=](double t) { return h * std::exp(h * t); },
            [=](double t) { return h * h * std::exp(h * t); }};
}

// Homogeneous toy -dt^2 + a(t)^2 (dx_1^2 + ... + dx_{n-1}^2).
inline MetricField contracting_toy(const ScaleFactor& sf, int n = 2) {
    MetricField g;
    g.dim = n;
    g.name = "contracting_toy";
    g.components = [sf, n](const Vec& x) {
        double a = sf.a(x[0]);
        Mat m = Mat::Identity(n, n) * (a * a);
        m(0, 0) = -1.0;
        return m;
    };
    g.derivative = [sf, n](const Vec& x) {
        double a = sf.a(x[0]), ad = sf.adot(x[0]);
        std::vector<Mat> d(n, Mat::Zero(n, n));
        d[0] = Mat::Identity(n, n) * (2.0 * a * ad);
        d[0](0, 0) = 0.0;
        return d;
    };
    return g;
}

} // namespace lorlab

#endif
