#ifndef LORLAB_SUBMANIFOLD_HPP
#define LORLAB_SUBMANIFOLD_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "lorlab/compare.hpp"
#include "lorlab/congruence.hpp"
#include "lorlab/curvature.hpp"
#include "lorlab/errors.hpp"
#include "lorlab/geodesic.hpp"
#include "lorlab/quadrature.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

// Spacelike submanifold patch given by an analytic parametrization
// phi: box in R^{n-m} -> chart coordinates, with first and second parameter
// derivatives. d2phi(u)[i] is the n x (n-m) matrix of d^2 phi^a / du^i du^j.
struct SubmanifoldPatch {
    MetricField metric;
    int m = 1; // codimension
    std::function<Vec(const Vec&)> phi;
    std::function<Mat(const Vec&)> dphi; // n x (n-m) Jacobian
    std::function<std::vector<Mat>(const Vec&)> d2phi;

    int n() const { return metric.dim; }
    int k() const { return metric.dim - m; } // tangent dimension
};

namespace detail {

// Parameter-space coordinates of an ambient tangent vector; throws if the
// vector is not tangent to the patch at u.
inline Vec tangent_coords(const SubmanifoldPatch& S, const Vec& u,
                          const Vec& v, double tol = 1e-8) {
    Mat J = S.dphi(u);
    Vec alpha = J.colPivHouseholderQr().solve(v);
    if ((J * alpha - v).norm() > tol * std::max(1.0, v.norm()))
        throw NotTangent("vector not tangent to patch");
    return alpha;
}

// g-orthonormal basis of the tangent space at u (induced metric must be
// positive definite: the patch is spacelike).
inline std::vector<Vec> tangent_frame(const SubmanifoldPatch& S, const Vec& u) {
    Mat J = S.dphi(u);
    Mat gm = S.metric.at(S.phi(u));
    std::vector<Vec> basis;
    for (int j = 0; j < S.k(); ++j) {
        Vec w = J.col(j);
        for (const Vec& e : basis) w -= w.dot(gm * e) * e;
        double q = w.dot(gm * w);
        if (q <= 0.0)
            throw DegenerateMetric("induced metric not positive definite");
        basis.push_back(Vec(w / std::sqrt(q)));
    }
    return basis;
}

} // namespace detail

// II(u_vec, w_vec) = nor(nabla_{u_vec} w_vec) at parameter point u.
inline Vec second_fundamental_form(const SubmanifoldPatch& S, const Vec& u,
                                   const Vec& uv, const Vec& wv) {
    Vec p = S.phi(u);
    Vec alpha = detail::tangent_coords(S, u, uv);
    Vec beta = detail::tangent_coords(S, u, wv);
    std::vector<Mat> H = S.d2phi(u);
    int n = S.n(), k = S.k();

    // Ambient covariant derivative of the extension of wv along uv.
    Vec D = Vec::Zero(n);
    for (int i = 0; i < k; ++i) D += alpha[i] * (H[i] * beta);
    Christoffel gam = christoffel(S.metric, p, detail::side_of(S.metric, p));
    for (int a = 0; a < n; ++a) D[a] += uv.dot(gam[a] * wv);

    // Subtract the tangential part.
    Mat J = S.dphi(u);
    Mat gm = S.metric.at(p);
    Mat G = J.transpose() * gm * J;
    Vec rhs = J.transpose() * gm * D;
    Vec coef = G.ldlt().solve(rhs);
    return D - J * coef;
}

// H_S = (1/(n-m)) sum II(e_i, e_i) over a g-orthonormal tangent basis.
inline Vec mean_curvature(const SubmanifoldPatch& S, const Vec& u) {
    std::vector<Vec> frame = detail::tangent_frame(S, u);
    Vec H = Vec::Zero(S.n());
    for (const Vec& e : frame) H += second_fundamental_form(S, u, e, e);
    return H / (double)S.k();
}

// k_S(v) = g(H_S, v).
inline double convergence(const SubmanifoldPatch& S, const Vec& u,
                          const Vec& v) {
    Vec p = S.phi(u);
    return mean_curvature(S, u).dot(S.metric.at(p) * v);
}

// ---------------------------------------------------------------------------
// Energy index form
// ---------------------------------------------------------------------------

// Frame version: V, W are component vectors in a parallel orthonormal frame
// along the geodesic, R(t) the tidal source in that frame, and the boundary
// term is -<gamma-dot(0), II(V(0),W(0))> supplied through boundary_coef so
// that for V = W = e_i the term equals -boundary_coef.
inline double index_form_frame(const TidalSource& R,
                               const std::function<Vec(double)>& V,
                               const std::function<Vec(double)>& W, double b,
                               double boundary_coef, double tol = 1e-10) {
    if (V(b).norm() > 1e-8 || W(b).norm() > 1e-8)
        throw BoundaryViolated("variation fields must vanish at t = b");
    double h = 1e-6 * b;
    auto integrand = [&](double t) {
        double tl = std::max(0.0, t - h), tr = std::min(b, t + h);
        Vec Vd = (V(tr) - V(tl)) / (tr - tl);
        Vec Wd = (W(tr) - W(tl)) / (tr - tl);
        return Vd.dot(Wd) - V(t).dot(R.at(t) * W(t));
    };
    double I = adaptive_quadrature(integrand, 0.0, b, tol);
    return I - boundary_coef * V(0.0).dot(W(0.0));
}

// Geometric version along a path with a transported frame: V_field, W_field
// give frame components; the boundary term comes from the patch's second
// fundamental form paired with the initial velocity.
inline double index_form(const GeodesicPath& path, const NormalFrame& frame,
                         const std::function<Vec(double)>& V,
                         const std::function<Vec(double)>& W, double b,
                         const SubmanifoldPatch& S, const Vec& u0,
                         double tol = 1e-10) {
    TidalSource R = geometric_source(path, frame);
    if (V(b).norm() > 1e-8 || W(b).norm() > 1e-8)
        throw BoundaryViolated("variation fields must vanish at t = b");
    // Boundary term: -<gamma-dot(0), II(V(0), W(0))> with V(0), W(0)
    // expanded in the frame basis (must be tangent to S).
    std::vector<Vec> E0 = frame.at(path.t_min);
    Vec v0 = Vec::Zero(S.n()), w0 = Vec::Zero(S.n());
    for (int i = 0; i < frame.d; ++i) {
        v0 += V(0.0)[i] * E0[i];
        w0 += W(0.0)[i] * E0[i];
    }
    Vec II = second_fundamental_form(S, u0, v0, w0);
    Vec p0 = path.position(path.t_min);
    double bterm = path.velocity(path.t_min).dot(S.metric.at(p0) * II);

    double h = 1e-6 * b;
    auto integrand = [&](double t) {
        double tl = std::max(0.0, t - h), tr = std::min(b, t + h);
        Vec Vd = (V(tr) - V(tl)) / (tr - tl);
        Vec Wd = (W(tr) - W(tl)) / (tr - tl);
        return Vd.dot(Wd) - V(t).dot(R.at(t) * W(t));
    };
    return adaptive_quadrature(integrand, 0.0, b, tol) - bterm;
}

// ---------------------------------------------------------------------------
// Focal machinery
// ---------------------------------------------------------------------------

// Shape operator matrix (S_nu)_ij = <nabla_{e_i} nu, e_j> in the given
// orthonormal tangent frame, with nu extended over the patch by nu_field.
inline Mat shape_operator(const SubmanifoldPatch& S, const Vec& u,
                          const std::function<Vec(const Vec&)>& nu_field,
                          const std::vector<Vec>& frame) {
    Vec p = S.phi(u);
    Mat gm = S.metric.at(p);
    Christoffel gam = christoffel(S.metric, p, detail::side_of(S.metric, p));
    int k = (int)frame.size(), n = S.n();
    Mat out(k, k);
    double h = 1e-6;
    for (int i = 0; i < k; ++i) {
        Vec alpha = detail::tangent_coords(S, u, frame[i]);
        Vec nup = nu_field(u + h * alpha), num = nu_field(u - h * alpha);
        Vec Dnu = (nup - num) / (2.0 * h);
        for (int a = 0; a < n; ++a) Dnu[a] += frame[i].dot(gam[a] * nu_field(u));
        for (int j = 0; j < k; ++j) out(i, j) = Dnu.dot(gm * frame[j]);
    }
    return Mat(0.5 * (out + out.transpose()));
}

struct FocalSumResult {
    double c = 0.0;         // k_S(nu)
    double sum_value = 0.0; // sum of I(X_i, X_i)
    double threshold = 0.0; // (n-m)(1/b - c) + b delta / 3
    bool focal_predicted = false;
};

// Evaluates sum_i I(X_i, X_i) for X_i = (1 - t/b) E_i along the normal
// geodesic gamma_nu and compares with the closed-form threshold.
inline FocalSumResult focal_sum_test(const SubmanifoldPatch& S, const Vec& u0,
                                     const Vec& nu, double b, double delta,
                                     double tol = 1e-10) {
    FocalSumResult out;
    out.c = convergence(S, u0, nu);
    if (out.c <= 0.0)
        throw NotTrappedDirection("k_S(nu) must be positive");
    if (!(b > 1.0 / out.c))
        throw HypothesisViolated("need b > 1/k_S(nu)");
    int nm = S.k();
    out.threshold = nm * (1.0 / b - out.c) + b * delta / 3.0;

    Vec p0 = S.phi(u0);
    GeodesicPath path = integrate_geodesic(S.metric, p0, nu, 0.0, b, tol);
    std::vector<Vec> seeds = detail::tangent_frame(S, u0);
    NormalFrame frame = normal_frame(path, seeds);
    if (frame.d != nm)
        throw BadFrame("tangent frame does not span the quotient");
    TidalSource R = geometric_source(path, frame);

    double sum = 0.0;
    for (int i = 0; i < nm; ++i) {
        auto X = [b, i, nm](double t) {
            Vec v = Vec::Zero(nm);
            v[i] = 1.0 - t / b;
            return v;
        };
        auto integrand = [&](double t) {
            double s = 1.0 - t / b;
            return 1.0 / (b * b) - s * s * R.at(t)(i, i);
        };
        double I = adaptive_quadrature(integrand, 0.0, b, tol);
        Vec e = seeds[i];
        Vec II = second_fundamental_form(S, u0, e, e);
        sum += I - nu.dot(S.metric.at(p0) * II);
        (void)X;
    }
    out.sum_value = sum;
    out.focal_predicted = sum < 0.0;
    return out;
}

// First focal parameter of S along gamma_nu: Jacobi flow with A(0) = id and
// Adot(0) = shape operator of nu in the transported tangent frame.
inline std::optional<double> detect_focal(
    const SubmanifoldPatch& S, const Vec& u0,
    const std::function<Vec(const Vec&)>& nu_field, double t_max,
    double tol = 1e-10) {
    Vec p0 = S.phi(u0);
    Vec nu = nu_field(u0);
    GeodesicPath path = integrate_geodesic(S.metric, p0, nu, 0.0, t_max, tol);
    std::vector<Vec> seeds = detail::tangent_frame(S, u0);
    NormalFrame frame = normal_frame(path, seeds);
    if (frame.d != S.k())
        throw BadFrame("frame dimension does not match patch codimension");
    Mat Sop = shape_operator(S, u0, nu_field, seeds);
    TidalSource R = geometric_source(path, frame);
    RiccatiTrajectory traj = integrate_jacobi(
        R, Mat::Identity(frame.d, frame.d), Sop, 0.0, t_max, tol);
    // Isotropic focusing gives det A with even-order zeros (e.g. (1 - t)^2
    // for the round sphere), so touches count as focal points too.
    return first_det_collapse(traj, 1e-9 * t_max);
}

// ---------------------------------------------------------------------------
// Genericity
// ---------------------------------------------------------------------------

struct GenericityWitness {
    double t0 = 0.0;
    int direction_index = 0;
    double c = 0.0;
    double tube_radius = 0.0;
    int n_probes = 0;
};

namespace detail {

// <R(V,X)X,V> at a probe point with both vectors transported from gamma(t0)
// along the straight coordinate segment to the probe.
inline std::optional<double> tube_probe_value(const MetricField& g,
                                              const Vec& base, const Vec& probe,
                                              const Vec& X0, const Vec& V0) {
    auto xs = [&](double s) { return Vec(base + s * (probe - base)); };
    auto xd = [&](double) { return Vec(probe - base); };
    Vec X, V;
    if ((probe - base).norm() < 1e-14) {
        X = X0;
        V = V0;
    } else {
        X = transport_along_curve(g, xs, xd, X0, 0.0, 1.0, 1e-9).eval(1.0);
        V = transport_along_curve(g, xs, xd, V0, 0.0, 1.0, 1e-9).eval(1.0);
    }
    DiffSide side = side_of(g, probe);
    if (g.regularity == Regularity::C11 && g.interface_fn &&
        g.interface_distance(probe) < 1e-6 * g.chart_scale)
        return std::nullopt; // off-interface probes only
    CurvatureSample cs = curvature(g, probe, side);
    if (!cs.defined) return std::nullopt;
    return riemann_inner(cs.riemann, g.at(probe), V, X, X, V);
}

} // namespace detail

// Scans candidate (t0, frame direction) pairs for a uniformly positive
// sectional-type curvature bound on a tube of probe points.
inline std::optional<GenericityWitness> genericity_scan(
    const GeodesicPath& path, const NormalFrame& frame, double window_lo,
    double window_hi, double tube_radius, int n_probes,
    unsigned long seed = 2024) {
    const MetricField& g = path.metric;
    std::mt19937_64 rng(seed);
    int n_t0 = 5;
    for (int it = 0; it < n_t0; ++it) {
        double t0 = window_lo + (window_hi - window_lo) * (it + 0.5) / n_t0;
        Vec base = path.position(t0);
        Vec X0 = path.velocity(t0);
        std::vector<Vec> E = frame.at(t0);
        for (int j = 0; j < (int)E.size(); ++j) {
            double lo = std::numeric_limits<double>::infinity();
            bool any = false, failed = false;
            for (int k = 0; k < n_probes && !failed; ++k) {
                Vec offset = (k == 0)
                                 ? Vec(Vec::Zero(g.dim))
                                 : Vec(tube_radius *
                                       detail::random_unit(g.dim, rng));
                auto val =
                    detail::tube_probe_value(g, base, Vec(base + offset), X0,
                                             E[j]);
                if (!val) continue;
                any = true;
                lo = std::min(lo, *val);
                if (lo <= 0.0) failed = true;
            }
            if (any && !failed && lo > 0.0) {
                GenericityWitness w;
                w.t0 = t0;
                w.direction_index = j;
                w.c = 0.9 * lo;
                w.tube_radius = tube_radius;
                w.n_probes = n_probes;
                return w;
            }
        }
    }
    return std::nullopt;
}

// Re-validates a witness with a finer probe set: sampled values must stay
// above the reported c.
inline bool genericity_validate(const GeodesicPath& path,
                                const NormalFrame& frame,
                                const GenericityWitness& w,
                                unsigned long seed = 4048) {
    const MetricField& g = path.metric;
    std::mt19937_64 rng(seed);
    Vec base = path.position(w.t0);
    Vec X0 = path.velocity(w.t0);
    Vec V0 = frame.at(w.t0)[w.direction_index];
    for (int k = 0; k < 2 * w.n_probes; ++k) {
        Vec offset = (k == 0) ? Vec(Vec::Zero(g.dim))
                              : Vec(w.tube_radius *
                                    detail::random_unit(g.dim, rng));
        auto val = detail::tube_probe_value(g, base, Vec(base + offset), X0, V0);
        if (val && *val <= w.c) return false;
    }
    return true;
}

// min eigenvalue of sym([R](t) - diag(c, -C, ..., -C)) positive at samples.
inline bool tidal_frame_bound(const TidalSource& R, double c, double C,
                              double t_lo, double t_hi, int n_samples = 50) {
    int d = R.d;
    Mat ref = Mat::Identity(d, d) * (-C);
    ref(0, 0) = c;
    for (int i = 0; i <= n_samples; ++i) {
        double t = t_lo + (t_hi - t_lo) * i / (double)n_samples;
        Mat diff = R.at(t) - ref;
        Mat sym = 0.5 * (diff + diff.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        if (!(es.eigenvalues()(0) > 0.0)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Trapped point check
// ---------------------------------------------------------------------------

struct TrappedWitness {
    int direction = 0;
    std::optional<double> t_witness; // first sampled t with k > 0
    double best_k = 0.0;             // max sampled convergence
};

struct TrappedPointResult {
    bool trapped = false;
    std::vector<TrappedWitness> witnesses;
};

namespace detail {

// Convergence k_{S_t}(gamma-dot) = -tr S of the exponential slice, built
// from finite differences of neighbouring null geodesics in the fan.
inline double slice_convergence(const std::vector<GeodesicPath>& bundle,
                                double t, double dphi) {
    // bundle = {gamma_-, gamma_0, gamma_+} per transverse angle parameter;
    // here one transverse dimension: three paths.
    const GeodesicPath& c = bundle[1];
    Vec J = (bundle[2].position(t) - bundle[0].position(t)) / (2.0 * dphi);
    double h = 1e-5 * std::max(1.0, t);
    Vec Jp = (bundle[2].position(t + h) - bundle[0].position(t + h)) / (2.0 * dphi);
    Vec Jm = (bundle[2].position(t - h) - bundle[0].position(t - h)) / (2.0 * dphi);
    Vec Jdot = (Jp - Jm) / (2.0 * h);
    Vec x = c.position(t);
    const MetricField& g = c.metric;
    Christoffel gam = christoffel(g, x, side_of(g, x));
    Vec u = c.velocity(t);
    for (int a = 0; a < g.dim; ++a) Jdot[a] += u.dot(gam[a] * J);
    Mat gm = g.at(x);
    double G = J.dot(gm * J);
    if (G <= 0.0) throw ConjugateBeforeSlice("slice Gram degenerate");
    return -Jdot.dot(gm * J) / G; // -tr S in the 1-d transverse space
}

} // namespace detail

// Fans future null directions from p (normalised against the frame timelike
// leg T by g(T, v) = const) and looks, per direction, for a slice parameter
// with positive convergence.
inline TrappedPointResult trapped_point_check(const MetricField& g,
                                              const Vec& p, int n_directions,
                                              double t_lo, double t_hi,
                                              double tol = 1e-9) {
    if (!g.in_chart(p)) throw LeftChart("trapped_point_check");
    int n = g.dim;
    if (n < 3)
        throw ConfigInvalid("need at least one transverse dimension");
    std::vector<Vec> fr = orthonormal_frame_at(g, p);
    TrappedPointResult out;
    out.trapped = true;
    double dphi = 1e-4;
    for (int k = 0; k < n_directions; ++k) {
        double phi0 = 2.0 * M_PI * k / n_directions;
        auto dir = [&](double phi) {
            Vec w = std::cos(phi) * fr[1] + std::sin(phi) * fr[2];
            return Vec(fr[0] + w); // null, g(T, v) = g(T, T) for all phi
        };
        std::vector<GeodesicPath> bundle;
        for (double phi : {phi0 - dphi, phi0, phi0 + dphi})
            bundle.push_back(
                integrate_geodesic(g, p, dir(phi), 0.0, t_hi * 1.001, tol));
        TrappedWitness w;
        w.direction = k;
        w.best_k = -std::numeric_limits<double>::infinity();
        int samples = 60;
        for (int i = 0; i <= samples; ++i) {
            double t = t_lo + (t_hi - t_lo) * i / (double)samples;
            double kv = detail::slice_convergence(bundle, t, dphi);
            if (kv > w.best_k) w.best_k = kv;
            if (kv > 1e-8 && !w.t_witness) w.t_witness = t;
        }
        if (!w.t_witness) out.trapped = false;
        out.witnesses.push_back(w);
    }
    return out;
}

} // namespace lorlab

#endif
