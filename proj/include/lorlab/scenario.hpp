#ifndef LORLAB_SCENARIO_HPP
#define LORLAB_SCENARIO_HPP

#include <algorithm>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorlab/causal2d.hpp"
#include "lorlab/congruence.hpp"
#include "lorlab/csv.hpp"
#include "lorlab/errors.hpp"
#include "lorlab/geodesic.hpp"
#include "lorlab/metric.hpp"
#include "lorlab/mollify.hpp"
#include "lorlab/submanifold.hpp"

namespace lorlab {

inline constexpr const char* kToolVersion = "lorlab 1.0";

struct Scenario {
    std::string name;
    std::string experiment;
    nlohmann::json metric;
    nlohmann::json params;
    std::string out; // CSV file name (relative to out_dir)
    unsigned long seed = 12345;
    bool allow_violation = false;
};

inline Scenario parse_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigInvalid("cannot open config: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("config parse error: ") + e.what());
    }
    Scenario s;
    if (!j.contains("name") || !j.contains("experiment"))
        throw ConfigInvalid("config requires 'name' and 'experiment' keys");
    s.name = j["name"].get<std::string>();
    s.experiment = j["experiment"].get<std::string>();
    s.metric = j.value("metric", nlohmann::json::object());
    s.params = j.value("params", nlohmann::json::object());
    s.out = j.value("out", s.name + ".csv");
    s.seed = j.value("seed", 12345ul);
    s.allow_violation = j.value("allow_violation", false);
    return s;
}

// Catalog lookup from the scenario's metric block.
inline MetricField scenario_metric(const nlohmann::json& m) {
    std::string name = m.value("catalog", "minkowski");
    if (name == "minkowski") return minkowski(m.value("dim", 4));
    if (name == "einstein_cylinder") return einstein_cylinder();
    if (name == "space_form")
        return space_form(m.value("K", 1.0), m.value("dim", 4));
    if (name == "space_form_static2d")
        return space_form_static2d(m.value("K", 1.0));
    if (name == "schwarzschild") return schwarzschild(m.value("M", 1.0));
    if (name == "matched") return matched_metric(m.value("beta", 0.5));
    if (name == "contracting_linear")
        return contracting_toy(scale_factor_linear(1.0, m.value("rate", -1.0)),
                               m.value("dim", 3));
    if (name == "contracting_cosh")
        return contracting_toy(scale_factor_cosh(), m.value("dim", 3));
    throw ConfigInvalid("unknown catalog metric: " + name);
}

namespace detail {

inline Vec json_vec(const nlohmann::json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

inline std::vector<double> json_list(const nlohmann::json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

inline Region json_region(const nlohmann::json& j) {
    Region r;
    for (const auto& pair : j)
        r.box.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    return r;
}

inline std::function<double(const Vec&)> scalar_field(const std::string& id) {
    if (id == "sign")
        return [](const Vec& x) { return x[0] >= 0.0 ? 1.0 : -1.0; };
    if (id == "cos") return [](const Vec& x) { return std::cos(x[0]); };
    if (id == "id") return [](const Vec& x) { return x[0]; };
    if (id == "const") return [](const Vec&) { return 1.0; };
    throw ConfigInvalid("unknown scalar field: " + id);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Experiment runners: each produces one CSV table.
// ---------------------------------------------------------------------------

inline CsvTable run_geodesic(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    Vec x0 = detail::json_vec(s.params.at("x0"));
    Vec v0 = detail::json_vec(s.params.at("v0"));
    double t0 = s.params.value("t0", 0.0);
    double t1 = s.params.at("t1").get<double>();
    double tol = s.params.value("tol", 1e-10);
    int samples = s.params.value("samples", 100);
    GeodesicPath path = integrate_geodesic(g, x0, v0, t0, t1, tol);
    CsvTable t;
    t.columns = {"t"};
    for (int i = 0; i < g.dim; ++i) t.columns.push_back("x" + std::to_string(i));
    for (int i = 0; i < g.dim; ++i) t.columns.push_back("v" + std::to_string(i));
    t.columns.push_back("ginv_norm_drift");
    double q0 = path.norm_squared(t0);
    for (int k = 0; k <= samples; ++k) {
        double tt = t0 + (t1 - t0) * k / (double)samples;
        std::vector<double> row{tt};
        Vec x = path.position(tt), v = path.velocity(tt);
        for (int i = 0; i < g.dim; ++i) row.push_back(x[i]);
        for (int i = 0; i < g.dim; ++i) row.push_back(v[i]);
        row.push_back(std::abs(path.norm_squared(tt) - q0));
        t.add_row(row);
    }
    return t;
}

inline CsvTable run_smoothing(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    std::vector<double> eps =
        s.params.value("eps_list", std::vector<double>{0.2, 0.1, 0.05, 0.025});
    Region region = s.params.contains("region")
                        ? detail::json_region(s.params["region"])
                        : Region{{{-0.5, 0.5}, {-0.6, 0.6}}};
    SmoothingReport rep = smoothing_report(g, eps, region);
    CsvTable t;
    t.columns = {"eps", "c0_error", "c1_error", "d2_bound", "dh_value"};
    for (std::size_t i = 0; i < rep.eps_list.size(); ++i)
        t.add_row({rep.eps_list[i], rep.c0_error[i], rep.c1_error[i],
                   rep.d2_bound[i], rep.dh_value[i]});
    return t;
}

inline CsvTable run_friedrichs(const Scenario& s) {
    std::vector<double> eps =
        s.params.value("eps_list", std::vector<double>{0.2, 0.1, 0.05});
    auto a = detail::scalar_field(s.params.value("a", "sign"));
    auto f = detail::scalar_field(s.params.value("f", "cos"));
    auto b0 = detail::scalar_field(s.params.value("b", "id"));
    auto b_family = [b0](double, const Vec& x) { return b0(x); };
    Region region = s.params.contains("region")
                        ? detail::json_region(s.params["region"])
                        : Region{{{-1.0, 1.0}}};
    CsvTable t;
    t.columns = {"eps", "residual"};
    for (double e : eps) {
        MollifierKernel kernel(e, {0});
        t.add_row({e, friedrichs_residual(a, f, b_family, kernel, region)});
    }
    return t;
}

inline CsvTable run_theta_bound(const Scenario& s) {
    std::vector<double> deltas =
        s.params.value("delta_list", std::vector<double>{0.0, 1e-3, 1e-2});
    std::vector<double> Ts = s.params.value("T_list",
                                            std::vector<double>{2.0, 4.0, 8.0});
    std::vector<double> ds = s.params.value("d_list", std::vector<double>{2, 3});
    CsvTable t;
    t.columns = {"delta", "d", "T", "r", "sup_theta", "bound", "pass"};
    for (double delta : deltas)
        for (double dd : ds)
            for (double T : Ts) {
                int d = (int)dd;
                TidalSource src = function_source(
                    d, [delta, d](double) {
                        return Mat(Mat::Identity(d, d) * (-delta / d));
                    });
                ThetaBoundResult r = theta_bound_experiment(src, T, T / 4.0);
                t.add_row({delta, dd, T, T / 4.0, r.sup_theta_abs, r.bound,
                           r.pass ? 1.0 : 0.0});
            }
    return t;
}

inline CsvTable run_conjugate_window(const Scenario& s) {
    CsvTable t;
    t.columns = {"delta", "T", "conj1", "conj2", "status"};
    if (s.params.contains("constant_c")) {
        // Constant c*id source with Lagrange data: conjugate times k*pi/sqrt(c).
        double c = s.params["constant_c"].get<double>();
        int d = s.params.value("d", 2);
        double T = s.params.value("T", 4.0);
        TidalSource src = function_source(d, [c, d](double) {
            return Mat(Mat::Identity(d, d) * c);
        });
        RiccatiTrajectory traj = integrate_jacobi(
            src, Mat::Zero(d, d), Mat::Identity(d, d), 0.0, T, 1e-12, 0.01);
        ConjugateScan scan = detect_conjugate(traj, 1e-6 * T);
        // Isotropic sources in even d give even-multiplicity zeros of det A
        // (tangencies), so merge both detection channels.
        std::vector<double> times = scan.zeros;
        times.insert(times.end(), scan.tangencies.begin(),
                     scan.tangencies.end());
        std::sort(times.begin(), times.end());
        std::vector<std::string> row{CsvTable::format(0.0), CsvTable::format(T)};
        row.push_back(times.empty() ? "-" : CsvTable::format(times[0]));
        row.push_back(times.size() < 2 ? "-" : CsvTable::format(times[1]));
        row.push_back(times.empty() ? "none" : "pair");
        t.rows.push_back(row);
        return t;
    }
    double c = s.params.value("c", 1.0), C = s.params.value("C", 1.0);
    double r = s.params.value("r", 0.5);
    int d = s.params.value("d", 2);
    std::vector<double> deltas =
        s.params.value("delta_list", std::vector<double>{1e-3, 10.0});
    std::vector<double> Ts =
        s.params.value("T_list", std::vector<double>{2, 4, 8, 16, 32});
    for (const auto& row : conjugate_window_experiment(c, C, r, d, deltas, Ts)) {
        std::vector<std::string> cells{CsvTable::format(row.delta),
                                       CsvTable::format(row.T)};
        cells.push_back(row.conj1 ? CsvTable::format(*row.conj1) : "-");
        cells.push_back(row.conj2 ? CsvTable::format(*row.conj2) : "-");
        cells.push_back(row.status);
        t.rows.push_back(cells);
    }
    return t;
}

inline CsvTable run_riccati_compare(const Scenario& s) {
    int n_pairs = s.params.value("n_pairs", 20);
    int d = s.params.value("d", 2);
    double t_end = s.params.value("t_end", 2.0);
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> nd;
    CsvTable t;
    t.columns = {"pair", "min_margin", "blowup_time", "ordered"};
    for (int k = 0; k < n_pairs; ++k) {
        Mat A(d, d), P(d, d), B0(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                A(i, j) = nd(rng);
                P(i, j) = nd(rng);
                B0(i, j) = 0.2 * nd(rng);
            }
        Mat S2 = 0.5 * (A + A.transpose());
        Mat S1 = S2 + P * P.transpose(); // S1 >= S2
        Mat Bc = 0.5 * (B0 + B0.transpose());
        RiccatiCompareResult r = riccati_compare(
            constant_source(S1), constant_source(S2), Bc, 0.0, t_end);
        double min_margin = std::numeric_limits<double>::infinity();
        for (auto& [tt, m] : r.margin_curve) min_margin = std::min(min_margin, m);
        t.rows.push_back({CsvTable::format((double)k),
                          CsvTable::format(min_margin),
                          r.blowup_time ? CsvTable::format(*r.blowup_time)
                                        : "-",
                          r.ordered ? "1" : "0"});
    }
    return t;
}

// Round sphere of radius rho in the t=0 slice of 4D Minkowski, with the
// ingoing (or outgoing) future null normal field.
inline SubmanifoldPatch flat_sphere_patch(double rho) {
    SubmanifoldPatch S;
    S.metric = minkowski(4);
    S.m = 2;
    S.phi = [rho](const Vec& u) {
        Vec p(4);
        p << 0.0, rho * std::sin(u[0]) * std::cos(u[1]),
            rho * std::sin(u[0]) * std::sin(u[1]), rho * std::cos(u[0]);
        return p;
    };
    S.dphi = [rho](const Vec& u) {
        Mat J(4, 2);
        J.setZero();
        J(1, 0) = rho * std::cos(u[0]) * std::cos(u[1]);
        J(2, 0) = rho * std::cos(u[0]) * std::sin(u[1]);
        J(3, 0) = -rho * std::sin(u[0]);
        J(1, 1) = -rho * std::sin(u[0]) * std::sin(u[1]);
        J(2, 1) = rho * std::sin(u[0]) * std::cos(u[1]);
        return J;
    };
    S.d2phi = [rho](const Vec& u) {
        std::vector<Mat> H(2, Mat::Zero(4, 2));
        double st = std::sin(u[0]), ct = std::cos(u[0]);
        double sp = std::sin(u[1]), cp = std::cos(u[1]);
        // d^2 phi / du0 du0
        H[0](1, 0) = -rho * st * cp;
        H[0](2, 0) = -rho * st * sp;
        H[0](3, 0) = -rho * ct;
        // d^2 phi / du0 du1
        H[0](1, 1) = -rho * ct * sp;
        H[0](2, 1) = rho * ct * cp;
        H[1](1, 0) = -rho * ct * sp;
        H[1](2, 0) = rho * ct * cp;
        // d^2 phi / du1 du1
        H[1](1, 1) = -rho * st * cp;
        H[1](2, 1) = -rho * st * sp;
        return H;
    };
    return S;
}

inline std::function<Vec(const Vec&)> sphere_null_normal(double rho,
                                                         bool ingoing) {
    return [rho, ingoing](const Vec& u) {
        Vec radial(4);
        radial << 0.0, std::sin(u[0]) * std::cos(u[1]),
            std::sin(u[0]) * std::sin(u[1]), std::cos(u[0]);
        Vec nu = -radial;
        if (!ingoing) nu = radial;
        nu[0] = 1.0;
        return nu;
    };
}

inline CsvTable run_focal(const Scenario& s) {
    double rho = s.params.value("rho", 1.0);
    double b = s.params.value("b", 2.0);
    double delta = s.params.value("delta", 0.0);
    SubmanifoldPatch S = flat_sphere_patch(rho);
    Vec u0(2);
    u0 << M_PI / 2.0, 0.0;
    auto nu_field = sphere_null_normal(rho, true);
    FocalSumResult fs = focal_sum_test(S, u0, nu_field(u0), b, delta);
    auto focal = detect_focal(S, u0, nu_field, s.params.value("t_max", 3.0));
    CsvTable t;
    t.columns = {"k_S", "threshold", "sum_value", "focal_time"};
    t.rows.push_back({CsvTable::format(fs.c), CsvTable::format(fs.threshold),
                      CsvTable::format(fs.sum_value),
                      focal ? CsvTable::format(*focal) : "-"});
    return t;
}

inline CsvTable run_genericity(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    Vec x0 = detail::json_vec(s.params.at("x0"));
    Vec v0 = detail::json_vec(s.params.at("v0"));
    double t1 = s.params.value("t1", 1.0);
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, t1, 1e-10);
    std::vector<Vec> seeds;
    for (int i = 0; i < g.dim; ++i) seeds.push_back(Vec(Vec::Unit(g.dim, i)));
    NormalFrame frame = normal_frame(path, seeds);
    double lo = s.params.value("window_lo", 0.1 * t1);
    double hi = s.params.value("window_hi", 0.9 * t1);
    double tube = s.params.value("tube_radius", 0.05);
    int n_probes = s.params.value("n_probes", 12);
    auto w = genericity_scan(path, frame, lo, hi, tube, n_probes, s.seed);
    CsvTable t;
    t.columns = {"found", "t0", "direction_index", "c", "tube_radius",
                 "n_probes", "validated"};
    if (w) {
        bool ok = genericity_validate(path, frame, *w, s.seed + 1);
        t.add_row({1.0, w->t0, (double)w->direction_index, w->c, w->tube_radius,
                   (double)w->n_probes, ok ? 1.0 : 0.0});
    } else {
        t.rows.push_back({"0", "-", "-", "-", CsvTable::format(tube),
                          CsvTable::format((double)n_probes), "-"});
    }
    return t;
}

inline CsvTable run_trapped_point(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    Vec p = s.params.contains("p") ? detail::json_vec(s.params["p"])
                                   : Vec(Vec::Zero(g.dim));
    int n_dir = s.params.value("n_directions", 8);
    double t_lo = s.params.value("t_lo", 0.05);
    double t_hi = s.params.value("t_hi", 0.8);
    TrappedPointResult r = trapped_point_check(g, p, n_dir, t_lo, t_hi);
    CsvTable t;
    t.columns = {"direction", "t_witness", "best_k", "trapped"};
    for (const auto& w : r.witnesses)
        t.rows.push_back({CsvTable::format((double)w.direction),
                          w.t_witness ? CsvTable::format(*w.t_witness) : "-",
                          CsvTable::format(w.best_k),
                          r.trapped ? "1" : "0"});
    return t;
}

inline CsvTable run_cone(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    Vec p = s.params.contains("p") ? detail::json_vec(s.params["p"])
                                   : Vec(Vec::Zero(2));
    double t_max = s.params.value("t_max", 2.0);
    int samples = s.params.value("samples", 50);
    ConeBoundary cb = future_boundary(g, p, t_max);
    CsvTable t;
    t.columns = {"lambda", "t_left", "x_left", "t_right", "x_right"};
    for (int k = 0; k <= samples; ++k) {
        double lam = t_max * k / (double)samples;
        Vec xl = cb.left.position(lam), xr = cb.right.position(lam);
        t.add_row({lam, xl[0], xl[1], xr[0], xr[1]});
    }
    return t;
}

inline CsvTable run_dconv(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    Vec p = detail::json_vec(s.params.at("p"));
    Vec q = detail::json_vec(s.params.at("q"));
    std::vector<double> eps =
        s.params.value("eps_list", std::vector<double>{0.2, 0.1, 0.05, 0.025});
    Region region = s.params.contains("region")
                        ? detail::json_region(s.params["region"])
                        : Region{{{-2.0, 4.0}, {-0.7, 0.7}}};
    CsvTable t;
    t.columns = {"eps", "d_eps", "d_exact", "gap"};
    for (const auto& row : dconv_experiment(g, p, q, eps, region))
        t.add_row({row.eps, row.d_eps, row.d_exact, row.gap});
    return t;
}

inline CsvTable run_cut(const Scenario& s) {
    MetricField g = scenario_metric(s.metric);
    Vec p = s.params.contains("p") ? detail::json_vec(s.params["p"])
                                   : Vec(Vec::Zero(2));
    Vec v = s.params.contains("v") ? detail::json_vec(s.params["v"])
                                   : Vec(Vec::Unit(2, 0));
    double t_max = s.params.value("t_max", 8.0);
    auto sv = cut_function(g, p, v, t_max);
    CsvTable t;
    t.columns = {"s", "finite"};
    t.add_row({sv ? *sv : std::numeric_limits<double>::quiet_NaN(),
               sv ? 1.0 : 0.0});
    return t;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

using ExperimentRunner = std::function<CsvTable(const Scenario&)>;

inline const std::map<std::string, ExperimentRunner>& experiment_table() {
    static const std::map<std::string, ExperimentRunner> table = {
        {"geodesic", run_geodesic},
        {"smoothing", run_smoothing},
        {"friedrichs", run_friedrichs},
        {"theta_bound", run_theta_bound},
        {"conjugate_window", run_conjugate_window},
        {"riccati_compare", run_riccati_compare},
        {"focal", run_focal},
        {"genericity", run_genericity},
        {"trapped_point", run_trapped_point},
        {"cone", run_cone},
        {"dconv", run_dconv},
        {"cut", run_cut},
    };
    return table;
}

struct RunOptions {
    std::string out_dir = ".";
    std::optional<unsigned long> seed_override;
};

// Exit codes: 0 pass, 1 experiment failure, 2 config error.
inline int run_scenario(const std::string& config_path, const RunOptions& opts,
                        std::string* message = nullptr) {
    Scenario s;
    try {
        s = parse_scenario(config_path);
        if (opts.seed_override) s.seed = *opts.seed_override;
        if (!experiment_table().count(s.experiment))
            throw ConfigInvalid("unknown experiment id: '" + s.experiment +
                                "'");
    } catch (const Error& e) {
        if (message) *message = e.what();
        return 2;
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        return 2;
    }
    try {
        CsvTable t = experiment_table().at(s.experiment)(s);
        std::time_t now = std::time(nullptr);
        char stamp[64];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%d %H:%M:%S",
                      std::gmtime(&now));
        t.metadata = {std::string("scenario: ") + s.name,
                      std::string("seed: ") + std::to_string(s.seed),
                      std::string("version: ") + kToolVersion,
                      std::string("generated: ") + stamp};
        t.write(opts.out_dir + "/" + s.out);
        if (message) *message = "wrote " + opts.out_dir + "/" + s.out;
        return 0;
    } catch (const ConfigInvalid& e) {
        if (message) *message = e.what();
        return 2;
    } catch (const Error& e) {
        if (message) *message = e.what();
        return s.allow_violation ? 0 : 1;
    } catch (const std::exception& e) {
        if (message) *message = e.what();
        return 1;
    }
}

} // namespace lorlab

#endif
