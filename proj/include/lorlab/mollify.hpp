#ifndef LORLAB_MOLLIFY_HPP
#define LORLAB_MOLLIFY_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "lorlab/compare.hpp"
#include "lorlab/curvature.hpp"
#include "lorlab/errors.hpp"
#include "lorlab/metric.hpp"
#include "lorlab/quadrature.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

// Standard bump mollifier on the epsilon-ball, discretised with a
// tensor-product Gauss-Legendre rule over the active axes. The quadrature
// weights are normalised by the quadrature mass of the bump itself, so the
// discrete kernel has mass exactly 1 and (by node symmetry) vanishing odd
// moments.
//
// `axes` selects the coordinates the convolution runs over. A field that is
// constant along an axis is unchanged by convolution along it, so dropping
// inactive axes evaluates the same mollification with far fewer samples
// (the marginal of a bump is again an admissible even kernel).
class MollifierKernel {
public:
    double epsilon = 0.1;
    std::vector<int> axes;             // chart axes the convolution varies
    std::vector<Vec> nodes;            // points y in the unit ball, per axis subspace
    std::vector<double> weights;       // normalised: sum = 1

    MollifierKernel() = default;
    MollifierKernel(double eps, std::vector<int> active_axes,
                    int nodes_per_axis = 16)
        : epsilon(eps), axes(std::move(active_axes)) {
        if (!(eps > 0.0)) throw ConfigInvalid("mollifier epsilon must be > 0");
        int k = (int)axes.size();
        GaussRule rule = gauss_legendre(nodes_per_axis);
        std::vector<int> idx(k, 0);
        double mass = 0.0;
        while (true) {
            Vec y(k);
            double w = 1.0;
            for (int i = 0; i < k; ++i) {
                y[i] = rule.nodes[idx[i]];
                w *= rule.weights[idx[i]];
            }
            double r2 = y.squaredNorm();
            if (r2 < 1.0) {
                double rho = std::exp(-1.0 / (1.0 - r2));
                nodes.push_back(y);
                weights.push_back(w * rho);
                mass += w * rho;
            }
            int i = 0;
            for (; i < k; ++i) {
                if (++idx[i] < nodes_per_axis) break;
                idx[i] = 0;
            }
            if (i == k) break;
        }
        for (double& w : weights) w /= mass;
    }

    // Discrete mass (== 1 by construction) and odd-moment magnitudes, for
    // the kernel invariant checks.
    double mass() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
    double odd_moment(int axis) const {
        double s = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j)
            s += weights[j] * nodes[j][axis];
        return s;
    }

    // (f * rho_eps)(x) for a scalar field on chart coordinates.
    double convolve(const std::function<double(const Vec&)>& f,
                    const Vec& x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            Vec xx = x;
            for (std::size_t i = 0; i < axes.size(); ++i)
                xx[axes[i]] -= epsilon * nodes[j][i];
            s += weights[j] * f(xx);
        }
        return s;
    }
};

namespace detail {

inline void check_padding(const MetricField& g, const Region& region,
                          double eps, const std::vector<int>& axes) {
    if (region.empty()) throw EmptyRegion("mollification region");
    if (!g.chart_bounds.empty()) {
        // Probe the corners of the epsilon-padded box.
        int n = region.dim();
        for (int corner = 0; corner < (1 << n); ++corner) {
            Vec x(n);
            for (int i = 0; i < n; ++i) {
                x[i] = (corner >> i & 1) ? region.box[i].second
                                         : region.box[i].first;
                for (int a : axes)
                    if (a == i) x[i] += (corner >> i & 1) ? eps : -eps;
            }
            if (!g.in_chart(x))
                throw PaddingViolation(
                    "region + epsilon ball exits the declared chart");
        }
    }
}

} // namespace detail

// Component-wise convolution of a C11 metric with the kernel. The returned
// field evaluates the quadrature sum on demand; Lorentzian signature is
// verified on a probe grid over the region.
inline MetricField smooth_metric(const MetricField& g,
                                 const MollifierKernel& kernel,
                                 const Region& region, int signature_probes = 9) {
    detail::check_padding(g, region, kernel.epsilon, kernel.axes);
    int n = g.dim;

    MetricField out;
    out.dim = n;
    out.regularity = Regularity::Smooth;
    out.name = g.name + "_eps";
    out.chart_scale = g.chart_scale;
    out.periodic_coord = g.periodic_coord;
    out.period = g.period;
    out.chart_bounds = region.box;
    MollifierKernel k = kernel;
    MetricField base = g;
    // Accumulate whole matrices per quadrature node: one base evaluation
    // serves every component, which matters on integrator hot paths.
    out.components = [base, k, n](const Vec& x) {
        Mat m = Mat::Zero(n, n);
        Vec xx(n);
        for (std::size_t j = 0; j < k.nodes.size(); ++j) {
            xx = x;
            for (std::size_t i = 0; i < k.axes.size(); ++i)
                xx[k.axes[i]] -= k.epsilon * k.nodes[j][i];
            m += k.weights[j] * base.at(xx);
        }
        return m;
    };
    // d(g * rho) = (dg) * rho: convolve the exact a.e. derivative when the
    // base metric supplies one (the components are C^1, so this is exact).
    if (base.derivative) {
        out.derivative = [base, k, n](const Vec& x) {
            std::vector<Mat> d(n, Mat::Zero(n, n));
            Vec xx(n);
            for (std::size_t j = 0; j < k.nodes.size(); ++j) {
                xx = x;
                for (std::size_t i = 0; i < k.axes.size(); ++i)
                    xx[k.axes[i]] -= k.epsilon * k.nodes[j][i];
                std::vector<Mat> db = base.derivative(xx);
                for (int c = 0; c < n; ++c) d[c] += k.weights[j] * db[c];
            }
            return d;
        };
    }

    std::mt19937_64 rng(7);
    for (int s = 0; s < signature_probes; ++s) {
        Vec x = detail::sample_point(region, rng);
        Eigen::SelfAdjointEigenSolver<Mat> es(out.at(x));
        int neg = 0;
        for (int i = 0; i < n; ++i)
            if (es.eigenvalues()[i] < 0.0) ++neg;
        if (neg != 1)
            throw SignatureLost("mollified metric not Lorentzian at probe");
    }
    return out;
}

// Cone adjustment used to pair the interior approximation with a strictly
// narrower (or wider) net: scales the time-time component by (1 -/+ k eps).
inline MetricField cone_adjusted(const MetricField& g, double k, double eps,
                                 bool narrow) {
    MetricField out = g;
    double fac = narrow ? (1.0 - k * eps) : (1.0 + k * eps);
    if (fac <= 0.0) throw ConfigInvalid("cone factor must stay positive");
    MetricField base = g;
    out.name = g.name + (narrow ? "_narrow" : "_wide");
    out.components = [base, fac](const Vec& x) {
        Mat m = base.at(x);
        m(0, 0) *= fac;
        return m;
    };
    out.derivative = nullptr;
    if (base.derivative) {
        out.derivative = [base, fac](const Vec& x) {
            std::vector<Mat> d = base.derivative(x);
            for (auto& m : d) m(0, 0) *= fac;
            return d;
        };
    }
    return out;
}

struct SmoothingReport {
    std::vector<double> eps_list;
    std::vector<double> c0_error, c1_error, d2_bound, dh_value;
};

namespace detail {

// Probe grid over the region, offset so no probe lands on the interface of
// a matched metric (grid points avoid coordinate zeros).
inline std::vector<Vec> probe_grid(const Region& region, int per_axis) {
    int n = region.dim();
    std::vector<Vec> out;
    std::vector<int> idx(n, 0);
    while (true) {
        Vec x(n);
        for (int i = 0; i < n; ++i) {
            auto [a, b] = region.box[i];
            x[i] = a + (b - a) * (idx[i] + 0.5) / per_axis;
        }
        out.push_back(x);
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < per_axis) break;
            idx[i] = 0;
        }
        if (i == n) break;
    }
    return out;
}

} // namespace detail

inline SmoothingReport smoothing_report(const MetricField& g,
                                        const std::vector<double>& eps_list,
                                        const Region& region,
                                        int probes_per_axis = 21) {
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw ConfigInvalid("eps_list must be strictly decreasing");
    int n = g.dim;
    std::vector<int> axes;
    for (int i = 0; i < n; ++i) axes.push_back(i);
    // Metrics that vary along a known subset of axes declare it via the
    // interface field; for the catalog matched metrics only x varies.
    if (g.interface_fn) axes = {1};

    SmoothingReport rep;
    std::vector<Vec> probes = detail::probe_grid(region, probes_per_axis);
    for (double eps : eps_list) {
        MollifierKernel kernel(eps, axes);
        MetricField ge = smooth_metric(g, kernel, region);
        double c0 = 0.0, c1 = 0.0, d2 = 0.0;
        double h1 = 1e-6, h2 = 1e-4;
        for (const Vec& x : probes) {
            c0 = std::max(c0, (ge.at(x) - g.at(x)).cwiseAbs().maxCoeff());
            for (int a : axes) {
                Vec xp = x, xm = x;
                xp[a] += h1;
                xm[a] -= h1;
                Mat dge = (ge.at(xp) - ge.at(xm)) / (2.0 * h1);
                Mat dg = g.derivative ? g.derivative(x)[a]
                                      : (g.at(xp) - g.at(xm)) / (2.0 * h1);
                c1 = std::max(c1, (dge - dg).cwiseAbs().maxCoeff());
                Vec yp = x, ym = x;
                yp[a] += h2;
                ym[a] -= h2;
                Mat d2m = (ge.at(yp) - 2.0 * ge.at(x) + ge.at(ym)) / (h2 * h2);
                d2 = std::max(d2, d2m.cwiseAbs().maxCoeff());
            }
        }
        rep.eps_list.push_back(eps);
        rep.c0_error.push_back(c0);
        rep.c1_error.push_back(c1);
        rep.d2_bound.push_back(d2);
        rep.dh_value.push_back(dh_distance(ge, g, region, 60));
    }
    return rep;
}

// sup over the probe grid of |(a f b)*rho_eps - (a*rho_eps)(f*rho_eps) b_eps|
// for scalar fields on the region. b_eps is the epsilon member of the
// uniformly convergent family.
inline double friedrichs_residual(
    const std::function<double(const Vec&)>& a,
    const std::function<double(const Vec&)>& f,
    const std::function<double(double, const Vec&)>& b_family,
    const MollifierKernel& kernel, const Region& region,
    int probes_per_axis = 41) {
    if (region.empty()) throw EmptyRegion("friedrichs_residual");
    double eps = kernel.epsilon;
    for (int i = 0; i < region.dim(); ++i) {
        // padding: probes stay eps inside the declared region
        if (region.box[i].second - region.box[i].first <= 2.0 * eps)
            throw PaddingViolation("region too small for epsilon padding");
    }
    Region inner = region;
    for (int i = 0; i < inner.dim(); ++i) {
        inner.box[i].first += eps;
        inner.box[i].second -= eps;
    }
    auto afb = [&](const Vec& x) { return a(x) * f(x) * b_family(0.0, x); };
    double worst = 0.0;
    for (const Vec& x : detail::probe_grid(inner, probes_per_axis)) {
        double lhs = kernel.convolve(afb, x);
        double rhs = kernel.convolve(a, x) * kernel.convolve(f, x) *
                     b_family(eps, x);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

// Smoothed triple product (a*rho)(f*rho) b_eps, for the lower-bound
// companion check.
inline double friedrichs_product_min(
    const std::function<double(const Vec&)>& a,
    const std::function<double(const Vec&)>& f,
    const std::function<double(double, const Vec&)>& b_family,
    const MollifierKernel& kernel, const Region& region,
    int probes_per_axis = 41) {
    double eps = kernel.epsilon;
    Region inner = region;
    for (int i = 0; i < inner.dim(); ++i) {
        inner.box[i].first += eps;
        inner.box[i].second -= eps;
    }
    double lo = std::numeric_limits<double>::infinity();
    for (const Vec& x : detail::probe_grid(inner, probes_per_axis))
        lo = std::min(lo, kernel.convolve(a, x) * kernel.convolve(f, x) *
                              b_family(eps, x));
    return lo;
}

struct RicciBoundSample {
    Vec point, vector;
    double value = 0.0; // Ric(X,X) at the minimising sample
};

struct RicciBoundResult {
    bool pass = false;
    RicciBoundSample worst;
};

// Samples Ric(X,X) over vectors with g(X,X) <= kappa and |X|_h <= C_norm on
// a grid of points; true iff every sample exceeds -delta.
inline RicciBoundResult ricci_lowerbound_check(const MetricField& g_eps,
                                               const Region& region,
                                               double kappa, double C_norm,
                                               double delta,
                                               int point_probes = 25,
                                               int vector_probes = 40,
                                               unsigned long seed = 99) {
    if (!(kappa < 0.0)) throw ConfigInvalid("kappa must be negative");
    std::mt19937_64 rng(seed);
    RicciBoundResult out;
    out.pass = true;
    out.worst.value = std::numeric_limits<double>::infinity();
    int n = g_eps.dim;
    std::uniform_real_distribution<double> radius(0.0, C_norm);
    for (int p = 0; p < point_probes; ++p) {
        Vec x = detail::sample_point(region, rng);
        CurvatureSample cs = curvature(g_eps, x);
        Mat gm = g_eps.at(x);
        int accepted = 0, attempts = 0;
        while (accepted < vector_probes && attempts < 50 * vector_probes) {
            ++attempts;
            Vec X = radius(rng) * detail::random_unit(n, rng);
            if (X.dot(gm * X) > kappa) continue;
            ++accepted;
            double val = X.dot(cs.ricci * X);
            if (val < out.worst.value) {
                out.worst.value = val;
                out.worst.point = x;
                out.worst.vector = X;
            }
            if (val <= -delta) out.pass = false;
        }
    }
    return out;
}

} // namespace lorlab

#endif
