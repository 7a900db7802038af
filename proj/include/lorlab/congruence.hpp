#ifndef LORLAB_CONGRUENCE_HPP
#define LORLAB_CONGRUENCE_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lorlab/errors.hpp"
#include "lorlab/geodesic.hpp"
#include "lorlab/ode.hpp"
#include "lorlab/types.hpp"

namespace lorlab {

// Tidal source [R](t) for the Jacobi equation Addot + [R] A = 0: either an
// explicit symmetric matrix function or the curvature operator evaluated
// along a geodesic in a parallel orthonormal frame.
struct TidalSource {
    int d = 0;
    std::function<Mat(double)> matrix;

    Mat at(double t) const { return matrix(t); }
};

inline TidalSource constant_source(const Mat& R) {
    if ((R - R.transpose()).norm() > 1e-12 * std::max(1.0, R.norm()))
        throw BadFrame("synthetic tidal source must be symmetric");
    return {(int)R.rows(), [R](double) { return R; }};
}

inline TidalSource function_source(int d, std::function<Mat(double)> fn) {
    return {d, std::move(fn)};
}

// Curvature operator along a path in the transported normal frame. The
// returned matrix is symmetrised; for smooth metrics the asymmetry is at
// frame-tolerance level.
inline TidalSource geometric_source(const GeodesicPath& path,
                                    const NormalFrame& frame) {
    int d = frame.d;
    auto fn = [&path, &frame](double t) {
        const MetricField& g = path.metric;
        Vec x = path.position(t), u = path.velocity(t);
        DiffSide side = detail::side_of(g, x);
        CurvatureSample cs = curvature(g, x, side);
        Mat gm = g.at(x);
        std::vector<Vec> E = frame.at(t);
        int dd = (int)E.size();
        Mat R(dd, dd);
        for (int i = 0; i < dd; ++i)
            for (int j = 0; j < dd; ++j)
                R(i, j) = riemann_inner(cs.riemann, gm, E[i], u, u, E[j]);
        return Mat(0.5 * (R + R.transpose()));
    };
    return {d, fn};
}

// Jacobi matrix trajectory A(t) with derived Riccati scalars. B = Adot A^-1
// and its decomposition are reported only where |det A| exceeds the floor.
class RiccatiTrajectory {
public:
    int d = 0;
    double t_begin = 0.0, t_end = 0.0;
    OdeSolution solution; // state (A columns, Adot columns), 2 d^2 entries
    double det_floor_rel = 1e-10;
    double max_abs_det = 0.0;

    Mat A_at(double t) const { return unpack(solution.eval(t), 0); }
    Mat Adot_at(double t) const { return unpack(solution.eval(t), 1); }
    double det_at(double t) const { return A_at(t).determinant(); }

    bool B_defined(double t) const {
        return std::abs(det_at(t)) > det_floor_rel * max_abs_det;
    }
    Mat B_at(double t) const {
        Mat A = A_at(t);
        return Adot_at(t) * A.inverse();
    }
    double theta(double t) const { return B_at(t).trace(); }
    double sigma_norm(double t) const {
        Mat B = B_at(t);
        Mat sym = 0.5 * (B + B.transpose());
        Mat sigma = sym - (sym.trace() / d) * Mat::Identity(d, d);
        return sigma.norm();
    }
    double omega_norm(double t) const {
        Mat B = B_at(t);
        return Mat(0.5 * (B - B.transpose())).norm();
    }

    Mat unpack(const Vec& y, int block) const {
        Mat M(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) M(i, j) = y[block * d * d + j * d + i];
        return M;
    }
};

namespace detail {

inline Vec pack_jacobi(const Mat& A, const Mat& Adot) {
    int d = (int)A.rows();
    Vec y(2 * d * d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
            y[j * d + i] = A(i, j);
            y[d * d + j * d + i] = Adot(i, j);
        }
    return y;
}

} // namespace detail

// Integrate the linear Jacobi form Addot + [R] A = 0 (passes smoothly
// through det A = 0, unlike the Riccati flow).
inline RiccatiTrajectory integrate_jacobi(const TidalSource& source,
                                          const Mat& A0, const Mat& Adot0,
                                          double t0, double t1,
                                          double tol = 1e-11,
                                          double max_step = 0.02) {
    int d = source.d;
    Mat stacked(2 * d, d);
    stacked << A0, Adot0;
    if (Eigen::FullPivLU<Mat>(stacked).rank() < d)
        throw RankDeficientData("rank [A0; Adot0] < d");

    RiccatiTrajectory traj;
    traj.d = d;
    traj.t_begin = t0;
    traj.t_end = t1;

    OdeRhs rhs = [&source, d](double t, const Vec& y) {
        Vec dy(2 * d * d);
        dy.head(d * d) = y.tail(d * d);
        Mat R = source.at(t);
        Mat A(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) A(i, j) = y[j * d + i];
        Mat Add = -R * A;
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) dy[d * d + j * d + i] = Add(i, j);
        return dy;
    };
    OdeOptions opts;
    opts.rel_tol = tol;
    opts.abs_tol = tol;
    opts.max_step = max_step;
    traj.solution = integrate_ode(rhs, t0, detail::pack_jacobi(A0, Adot0), t1, opts);

    double m = 0.0;
    for (const auto& s : traj.solution.steps)
        m = std::max(m, std::abs(traj.unpack(s.y1, 0).determinant()));
    traj.max_abs_det = std::max(m, std::abs(A0.determinant()));
    return traj;
}

// Piecewise integration when the source has known discontinuity times.
inline RiccatiTrajectory integrate_jacobi_piecewise(
    const TidalSource& source, const Mat& A0, const Mat& Adot0, double t0,
    double t1, const std::vector<double>& breakpoints, double tol = 1e-11,
    double max_step = 0.02) {
    std::vector<double> ts{t0};
    for (double b : breakpoints)
        if (b > t0 && b < t1) ts.push_back(b);
    ts.push_back(t1);

    RiccatiTrajectory traj;
    traj.d = source.d;
    traj.t_begin = t0;
    traj.t_end = t1;
    Mat A = A0, Adot = Adot0;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        RiccatiTrajectory part =
            integrate_jacobi(source, A, Adot, ts[k], ts[k + 1], tol, max_step);
        for (auto& st : part.solution.steps) traj.solution.steps.push_back(st);
        A = part.A_at(ts[k + 1]);
        Adot = part.Adot_at(ts[k + 1]);
        traj.max_abs_det = std::max(traj.max_abs_det, part.max_abs_det);
    }
    return traj;
}

struct ConjugateScan {
    std::vector<double> zeros;      // sign changes of det A
    std::vector<double> tangencies; // det touches zero without crossing
};

// Zeros of det A(t). Sign changes are localised by bisection; zeros of even
// multiplicity (isotropic focusing in even d gives det ~ sin^k) are found as
// refined local minima of |det| that reach the numerical zero floor.
inline ConjugateScan detect_conjugate(const RiccatiTrajectory& traj,
                                      double skip_initial = 0.0,
                                      double loc_tol = 1e-10) {
    ConjugateScan out;
    double a = traj.t_begin + skip_initial, b = traj.t_end;
    if (b <= a) return out;
    int m = std::max(400, (int)traj.solution.steps.size());
    double touch_tol = 1e-8 * std::max(traj.max_abs_det, 1e-300);

    std::vector<double> dets(m + 1);
    for (int i = 0; i <= m; ++i) dets[i] = traj.det_at(a + (b - a) * i / m);

    auto refine_min = [&](double lo, double hi) {
        for (int it = 0; it < 300 && hi - lo > loc_tol; ++it) {
            double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (std::abs(traj.det_at(m1)) <= std::abs(traj.det_at(m2)))
                hi = m2;
            else
                lo = m1;
        }
        return 0.5 * (lo + hi);
    };

    for (int i = 1; i <= m; ++i) {
        double t = a + (b - a) * i / m;
        double prev_t = a + (b - a) * (i - 1.0) / m;
        double det = dets[i], prev_det = dets[i - 1];
        if (prev_det == 0.0 || det * prev_det < 0.0) {
            double lo = prev_t, hi = t, flo = prev_det;
            while (hi - lo > loc_tol) {
                double mid = 0.5 * (lo + hi);
                double fm = traj.det_at(mid);
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
            out.zeros.push_back(0.5 * (lo + hi));
        } else if (i >= 2 && i < m && std::abs(dets[i - 1]) <= std::abs(dets[i - 2]) &&
                   std::abs(dets[i - 1]) <= std::abs(det)) {
            // interior local minimum of |det|: refine and test for a touch
            double t_min = refine_min(a + (b - a) * (i - 2.0) / m, t);
            if (std::abs(traj.det_at(t_min)) < touch_tol) {
                bool dup = false;
                for (double z : out.zeros)
                    if (std::abs(z - t_min) < 10 * loc_tol) dup = true;
                for (double z : out.tangencies)
                    if (std::abs(z - t_min) < 10 * (b - a) / m) dup = true;
                if (!dup) out.tangencies.push_back(t_min);
            }
        }
    }
    return out;
}

// First time (after skip_initial) at which det A reaches zero, through either
// a sign change or an even-order touch. This is where B = Adot A^-1 blows up.
inline std::optional<double> first_det_collapse(const RiccatiTrajectory& traj,
                                                double skip_initial = 0.0) {
    ConjugateScan scan = detect_conjugate(traj, skip_initial);
    std::optional<double> out;
    for (double z : scan.zeros)
        if (!out || z < *out) out = z;
    for (double z : scan.tangencies)
        if (!out || z < *out) out = z;
    return out;
}

// sup over samples of |theta-dot + Ric + tr(sigma^2) + theta^2/d| with
// theta-dot by central finite differences on the dense output.
inline double raychaudhuri_residual(const RiccatiTrajectory& traj,
                                    const std::function<double(double)>& ricci,
                                    double t_from, double t_to,
                                    int n_samples = 200) {
    double h = 1e-5 * (t_to - t_from);
    double worst = 0.0;
    for (int i = 0; i <= n_samples; ++i) {
        double t = t_from + (t_to - t_from) * i / (double)n_samples;
        if (t - h < traj.t_begin || t + h > traj.t_end) continue;
        if (!traj.B_defined(t)) continue;
        double thdot = (traj.theta(t + h) - traj.theta(t - h)) / (2.0 * h);
        Mat B = traj.B_at(t);
        Mat sym = 0.5 * (B + B.transpose());
        double th = sym.trace();
        Mat sigma = sym - (th / traj.d) * Mat::Identity(traj.d, traj.d);
        double tr_sig2 = (sigma * sigma).trace();
        double res = thdot + ricci(t) + tr_sig2 + th * th / traj.d;
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Closed-form Riccati comparison solutions
// ---------------------------------------------------------------------------

enum class ComparisonKind { Cot, Tanh, Coth };

// Closed-form solutions of the scalar comparison Riccati equations:
//   Cot : H(t) = d sqrt(c) cot( sqrt(c)(t-t1) + arccot(f/sqrt(c)) )
//   Tanh: H(t) = d sqrt(C) tanh( sqrt(C)(t-t1) + artanh(f/sqrt(C)) )
//   Coth: H(t) = d sqrt(C) coth( sqrt(C)(t-t1) + arcoth(f/(d sqrt(C))) )
// The normalisations (including the factor d inside the Coth initial value)
// follow the printed formulas; see riccati-vs-closed-form regression tests.
inline double comparison_solution(ComparisonKind kind, double strength,
                                  double f, double t1, double t, int d) {
    if (strength <= 0.0) throw BranchViolation("strength must be positive");
    double s = std::sqrt(strength);
    double u = s * (t - t1);
    switch (kind) {
        case ComparisonKind::Cot: {
            double phase = std::atan2(s, f); // arccot(f/s) in (0, pi)
            double arg = u + phase;
            if (arg <= 0.0 || arg >= M_PI)
                throw BranchViolation("cot argument outside (0, pi)");
            return d * s * std::cos(arg) / std::sin(arg);
        }
        case ComparisonKind::Tanh: {
            double ratio = f / s;
            if (std::abs(ratio) >= 1.0)
                throw BranchViolation("|f/sqrt(C)| must be < 1 for tanh");
            return d * s * std::tanh(u + std::atanh(ratio));
        }
        case ComparisonKind::Coth: {
            double ratio = f / (d * s);
            if (std::abs(ratio) <= 1.0)
                throw BranchViolation("|f/(d sqrt(C))| must be > 1 for coth");
            double arc = 0.5 * std::log((ratio + 1.0) / (ratio - 1.0));
            double arg = u + arc;
            if (arg == 0.0) throw BranchViolation("coth pole");
            return d * s * std::cosh(arg) / std::sinh(arg);
        }
    }
    throw BranchViolation("unknown branch");
}

// ---------------------------------------------------------------------------
// Riccati comparison experiment
// ---------------------------------------------------------------------------

struct RiccatiCompareResult {
    bool ordered = false;
    std::vector<std::pair<double, double>> margin_curve; // (t, min eig(B2-B1))
    std::optional<double> blowup_time;
};

// Integrates both Riccati flows B-dot = -B^2 - R from a common self-adjoint
// initial value and checks B1 <= B2 whenever source1 >= source2.
inline RiccatiCompareResult riccati_compare(const TidalSource& source1,
                                            const TidalSource& source2,
                                            const Mat& B_init, double t1,
                                            double t_end, double tol = 1e-10,
                                            bool allow_blowup = true) {
    int d = source1.d;
    // Hypothesis: source1 >= source2 in the matrix order.
    for (int i = 0; i <= 50; ++i) {
        double t = t1 + (t_end - t1) * i / 50.0;
        Mat diff = source1.at(t) - source2.at(t);
        Mat sym = 0.5 * (diff + diff.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        if (es.eigenvalues()(0) < -1e-10)
            throw HypothesisViolated("source1 >= source2 fails at t=" +
                                     std::to_string(t));
    }

    Mat I = Mat::Identity(d, d);
    RiccatiTrajectory f1 = integrate_jacobi(source1, I, B_init, t1, t_end, tol);
    RiccatiTrajectory f2 = integrate_jacobi(source2, I, B_init, t1, t_end, tol);

    // A pole of either Riccati flow is a zero of the corresponding det A
    // (sign change or even-order touch).
    std::optional<double> collapse;
    for (const RiccatiTrajectory* f : {&f1, &f2}) {
        std::optional<double> c = first_det_collapse(*f);
        if (c && (!collapse || *c < *collapse)) collapse = c;
    }

    RiccatiCompareResult out;
    out.ordered = true;
    int m = 400;
    double spacing = (t_end - t1) / (double)m;
    for (int i = 0; i <= m; ++i) {
        double t = t1 + (t_end - t1) * i / (double)m;
        if (collapse && t >= *collapse - spacing) {
            out.blowup_time = *collapse;
            break;
        }
        if (!f1.B_defined(t) || !f2.B_defined(t)) {
            out.blowup_time = t;
            break;
        }
        Mat diff = f2.B_at(t) - f1.B_at(t);
        Mat sym = 0.5 * (diff + diff.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        double margin = es.eigenvalues()(0);
        out.margin_curve.emplace_back(t, margin);
        if (margin < -10.0 * std::max(tol, 1e-12) *
                         std::max(1.0, f1.B_at(t).norm()))
            out.ordered = false;
    }
    if (out.blowup_time && !allow_blowup)
        throw BlowUp("Riccati flow blew up at t=" +
                     std::to_string(*out.blowup_time));
    return out;
}

// ---------------------------------------------------------------------------
// Expansion bound experiment (box estimate)
// ---------------------------------------------------------------------------

struct ThetaBoundResult {
    double sup_theta_abs = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// Integrates the Jacobi flow from A(-T) = 0, A(0) = id (realised by a
// constant right factor) and checks sup |theta| <= 4d/T on [-r, r].
inline ThetaBoundResult theta_bound_experiment(const TidalSource& source,
                                               double T, double r,
                                               double tol = 1e-11) {
    int d = source.d;
    if (!(r > 0.0 && r < T / 2.0))
        throw HypothesisViolated("need 0 < r < T/2");
    RiccatiTrajectory traj =
        integrate_jacobi(source, Mat::Zero(d, d), Mat::Identity(d, d), -T, T,
                         tol);
    std::optional<double> collapse = first_det_collapse(traj, 1e-6 * T);
    if (collapse)
        throw ConjugateInWindow("conjugate point at t=" +
                                std::to_string(*collapse));
    Mat A0 = traj.A_at(0.0);
    if (std::abs(A0.determinant()) < 1e-12 * traj.max_abs_det)
        throw ConjugateInWindow("A(0) singular");
    // theta is invariant under the constant right factor A(0)^{-1}; the
    // normalisation is kept for the exported A.
    ThetaBoundResult out;
    out.bound = 4.0 * d / T;
    int m = 400;
    for (int i = 0; i <= m; ++i) {
        double t = -r + 2.0 * r * i / (double)m;
        out.sup_theta_abs = std::max(out.sup_theta_abs, std::abs(traj.theta(t)));
    }
    out.pass = out.sup_theta_abs <= out.bound;
    return out;
}

// ---------------------------------------------------------------------------
// Conjugate-pair window experiment
// ---------------------------------------------------------------------------

struct ConjugateWindowRow {
    double delta = 0.0;
    double T = 0.0;
    std::optional<double> conj1, conj2; // the pair (-T, t*) when present
    std::string status;                 // "pair" or "none"
};

// Worst-case synthetic source for the conjugate-pair existence check:
// diag(c+eta, -C+eta, ...) on [-r, r] and (-delta/d) id outside.
inline TidalSource window_source(double c, double C, double delta, double r,
                                 int d, double eta = 1e-6) {
    Mat inside = Mat::Identity(d, d) * (-C + eta);
    inside(0, 0) = c + eta;
    Mat outside = Mat::Identity(d, d) * (-delta / d);
    return function_source(d, [inside, outside, r](double t) {
        return (std::abs(t) <= r) ? inside : outside;
    });
}

inline std::vector<ConjugateWindowRow> conjugate_window_experiment(
    double c, double C, double r, int d,
    const std::vector<double>& delta_ladder,
    const std::vector<double>& T_ladder, double tol = 1e-10) {
    if (!(r > 0.0 && r < M_PI / (4.0 * std::sqrt(c))))
        throw HypothesisViolated("need 0 < r < pi/(4 sqrt(c))");
    std::vector<ConjugateWindowRow> rows;
    for (double delta : delta_ladder) {
        for (double T : T_ladder) {
            TidalSource src = window_source(c, C, delta, r, d);
            RiccatiTrajectory traj = integrate_jacobi_piecewise(
                src, Mat::Zero(d, d), Mat::Identity(d, d), -T, T, {-r, r}, tol);
            std::optional<double> conj = first_det_collapse(traj, 1e-5 * T);
            ConjugateWindowRow row;
            row.delta = delta;
            row.T = T;
            if (conj) {
                row.conj1 = -T;
                row.conj2 = conj;
                row.status = "pair";
            } else {
                row.status = "none";
            }
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace lorlab

#endif
