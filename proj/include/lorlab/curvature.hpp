#ifndef LORLAB_CURVATURE_HPP
#define LORLAB_CURVATURE_HPP

#include <cmath>
#include <vector>

#include "lorlab/errors.hpp"
#include "lorlab/metric.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

// Which side of the interface to difference on for C11 metrics.
enum class DiffSide { Auto, Plus, Minus };

// Relative finite-difference steps (see also curvature()).
inline constexpr double kGammaFdStep = 1e-5;
inline constexpr double kDGammaFdStep = 1e-4;
inline constexpr double kOnInterfaceTol = 1e-9;

using Christoffel = std::vector<Mat>; // Gamma[a](b,c) = Gamma^a_{bc}

// R^a_{bcd} with R(d_c, d_d) d_b = R^a_{bcd} d_a, i.e. the
// [nabla_X, nabla_Y]Z - nabla_{[X,Y]}Z convention.
struct RiemannTensor {
    int n = 0;
    std::vector<double> v;
    RiemannTensor() = default;
    explicit RiemannTensor(int n_) : n(n_), v(n_ * n_ * n_ * n_, 0.0) {}
    double& operator()(int a, int b, int c, int d) {
        return v[((a * n + b) * n + c) * n + d];
    }
    double operator()(int a, int b, int c, int d) const {
        return v[((a * n + b) * n + c) * n + d];
    }
};

struct CurvatureSample {
    RiemannTensor riemann;
    Mat ricci;
    bool defined = true;
};

namespace detail {

// Step sign per coordinate so a one-sided stencil stays on the requested
// side of the interface.
inline double side_step_sign(const MetricField& g, const Vec& x, int c,
                             double h, DiffSide side) {
    Vec xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    double grad = g.interface_fn(xp) - g.interface_fn(xm);
    double want = (side == DiffSide::Plus) ? 1.0 : -1.0;
    if (grad == 0.0) return 1.0; // interface does not vary along x^c
    return (grad * want > 0.0) ? 1.0 : -1.0;
}

// d g_ab / d x^c at x by finite differences, honouring the interface.
inline std::vector<Mat> metric_derivative_fd(const MetricField& g, const Vec& x,
                                             DiffSide side, double rel_step) {
    int n = g.dim;
    std::vector<Mat> d(n);
    for (int c = 0; c < n; ++c) {
        double h = rel_step * std::max(1.0, std::abs(x[c])) * g.chart_scale;
        bool near_interface =
            g.regularity == Regularity::C11 && g.interface_fn &&
            g.interface_distance(x) < 2.5 * h;
        if (!near_interface) {
            Vec xp = x, xm = x;
            xp[c] += h;
            xm[c] -= h;
            d[c] = (g.at(xp) - g.at(xm)) / (2.0 * h);
        } else if (side == DiffSide::Auto) {
            throw InterfaceTooClose("finite-difference stencil straddles the "
                                    "interface; request a one-sided mode");
        } else {
            double s = side_step_sign(g, x, c, h, side);
            Vec x1 = x, x2 = x;
            x1[c] += s * h;
            x2[c] += 2.0 * s * h;
            d[c] = (-3.0 * g.at(x) + 4.0 * g.at(x1) - g.at(x2)) / (2.0 * s * h);
        }
    }
    return d;
}

} // namespace detail

inline Christoffel christoffel(const MetricField& g, const Vec& x,
                               DiffSide side = DiffSide::Auto) {
    int n = g.dim;
    Mat gm = g.at(x);
    Eigen::FullPivLU<Mat> lu(gm);
    if (!lu.isInvertible())
        throw DegenerateMetric("metric not invertible at probe point");
    Mat ginv = lu.inverse();

    std::vector<Mat> dg = g.derivative
                              ? g.derivative(x)
                              : detail::metric_derivative_fd(g, x, side,
                                                             kGammaFdStep);
    Christoffel gamma(n, Mat::Zero(n, n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = b; c < n; ++c) {
                double sum = 0.0;
                for (int dd = 0; dd < n; ++dd)
                    sum += ginv(a, dd) *
                           (dg[b](dd, c) + dg[c](dd, b) - dg[dd](b, c));
                gamma[a](b, c) = 0.5 * sum;
                gamma[a](c, b) = gamma[a](b, c);
            }
    return gamma;
}

inline CurvatureSample curvature(const MetricField& g, const Vec& x,
                                 DiffSide side = DiffSide::Auto) {
    int n = g.dim;
    CurvatureSample out;
    if (g.regularity == Regularity::C11 && g.interface_fn &&
        g.interface_distance(x) < kOnInterfaceTol * g.chart_scale &&
        side == DiffSide::Auto) {
        out.defined = false;
        out.riemann = RiemannTensor(n);
        out.ricci = Mat::Zero(n, n);
        return out;
    }

    // dGamma[c][a](d,b) = d Gamma^a_{db} / d x^c
    std::vector<Christoffel> dgamma(n);
    for (int c = 0; c < n; ++c) {
        double h = kDGammaFdStep * std::max(1.0, std::abs(x[c])) * g.chart_scale;
        bool near_interface = g.regularity == Regularity::C11 &&
                              g.interface_fn && g.interface_distance(x) < 2.5 * h;
        if (!near_interface) {
            Vec xp = x, xm = x;
            xp[c] += h;
            xm[c] -= h;
            Christoffel gp = christoffel(g, xp, side);
            Christoffel gm2 = christoffel(g, xm, side);
            dgamma[c].assign(n, Mat::Zero(n, n));
            for (int a = 0; a < n; ++a) dgamma[c][a] = (gp[a] - gm2[a]) / (2.0 * h);
        } else if (side == DiffSide::Auto) {
            throw InterfaceTooClose("curvature stencil straddles the interface");
        } else {
            double s = detail::side_step_sign(g, x, c, h, side);
            Christoffel g0 = christoffel(g, x, side);
            Vec x1 = x, x2 = x;
            x1[c] += s * h;
            x2[c] += 2.0 * s * h;
            Christoffel g1 = christoffel(g, x1, side);
            Christoffel g2 = christoffel(g, x2, side);
            dgamma[c].assign(n, Mat::Zero(n, n));
            for (int a = 0; a < n; ++a)
                dgamma[c][a] = (-3.0 * g0[a] + 4.0 * g1[a] - g2[a]) / (2.0 * s * h);
        }
    }

    Christoffel gam = christoffel(g, x, side);
    RiemannTensor R(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double val = dgamma[c][a](d, b) - dgamma[d][a](c, b);
                    for (int e = 0; e < n; ++e)
                        val += gam[a](c, e) * gam[e](d, b) -
                               gam[a](d, e) * gam[e](c, b);
                    R(a, b, c, d) = val;
                }

    // Ric(X,Y) = sum_i <E_i,E_i><R(E_i,X)Y,E_i> reduces to the coordinate
    // contraction Ric_bd = R^a_{b a d}.
    Mat ric = Mat::Zero(n, n);
    for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) {
            double sum = 0.0;
            for (int a = 0; a < n; ++a) sum += R(a, b, a, d);
            ric(b, d) = sum;
        }
    out.riemann = std::move(R);
    out.ricci = ric;
    out.defined = true;
    return out;
}

// Orthonormal frame at x with the timelike leg first.
inline std::vector<Vec> orthonormal_frame_at(const MetricField& g, const Vec& x) {
    Mat gm = g.at(x);
    Eigen::SelfAdjointEigenSolver<Mat> es(gm);
    std::vector<Vec> frame;
    int n = g.dim;
    int neg = -1;
    for (int i = 0; i < n; ++i)
        if (es.eigenvalues()[i] < 0.0) neg = i;
    if (neg < 0) throw DegenerateMetric("no timelike eigendirection");
    frame.push_back(Vec(es.eigenvectors().col(neg) /
                        std::sqrt(-es.eigenvalues()[neg])));
    for (int i = 0; i < n; ++i) {
        if (i == neg) continue;
        if (es.eigenvalues()[i] <= 0.0)
            throw DegenerateMetric("signature is not Lorentzian");
        frame.push_back(Vec(es.eigenvectors().col(i) /
                            std::sqrt(es.eigenvalues()[i])));
    }
    return frame;
}

// <R(v,u)w, z> with all arguments coordinate vectors.
inline double riemann_inner(const RiemannTensor& R, const Mat& gm, const Vec& v,
                            const Vec& u, const Vec& w, const Vec& z) {
    int n = R.n;
    double out = 0.0;
    for (int a = 0; a < n; ++a) {
        double comp = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    comp += R(a, b, c, d) * v[c] * u[d] * w[b];
        for (int e = 0; e < n; ++e) out += gm(a, e) * comp * z[e];
    }
    return out;
}

// Tidal force operator on the span of the given frame: entries
// <R(E_i, u) u, E_j>. The frame must be g-orthonormal and orthogonal to u.
inline Mat tidal_operator(const MetricField& g, const Vec& x, const Vec& u,
                          const std::vector<Vec>& frame, double tol = 1e-6,
                          DiffSide side = DiffSide::Auto) {
    Mat gm = g.at(x);
    int d = (int)frame.size();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(frame[i].dot(gm * frame[j]) - want) > tol)
                throw BadFrame("frame not g-orthonormal");
        }
        if (std::abs(frame[i].dot(gm * u)) > tol * std::max(1.0, u.norm()))
            throw BadFrame("frame not orthogonal to u");
    }
    CurvatureSample cs = curvature(g, x, side);
    Mat out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = riemann_inner(cs.riemann, gm, frame[i], u, u, frame[j]);
    return out;
}

} // namespace lorlab

#endif
