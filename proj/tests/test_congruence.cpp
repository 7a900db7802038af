#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lorlab/congruence.hpp"

using namespace lorlab;

namespace {

Vec vec4(double a, double b, double c, double d) {
    Vec v(4);
    v << a, b, c, d;
    return v;
}

Mat sym_random(int d, std::mt19937& rng, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    Mat M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = dist(rng);
    return Mat(0.5 * (M + M.transpose()));
}

} // namespace

TEST_CASE("constant positive source: first conjugate point at pi/sqrt(c)") {
    for (double c : {0.25, 1.0, 4.0}) {
        int d = 3; // det A = (sin(sqrt(c) t)/sqrt(c))^3 changes sign
        TidalSource src = constant_source(Mat(c * Mat::Identity(d, d)));
        double t_star = M_PI / std::sqrt(c);
        RiccatiTrajectory traj =
            integrate_jacobi(src, Mat::Zero(d, d), Mat::Identity(d, d), 0.0,
                             1.2 * t_star);
        ConjugateScan scan = detect_conjugate(traj, 1e-3);
        REQUIRE(!scan.zeros.empty());
        CHECK(scan.zeros.front() == doctest::Approx(t_star).epsilon(1e-8));
    }
    // Even d: det A only touches zero at the conjugate point.
    {
        int d = 2;
        TidalSource src = constant_source(Mat::Identity(d, d));
        RiccatiTrajectory traj =
            integrate_jacobi(src, Mat::Zero(d, d), Mat::Identity(d, d), 0.0,
                             4.0);
        ConjugateScan scan = detect_conjugate(traj, 1e-3);
        CHECK(scan.zeros.empty());
        REQUIRE(!scan.tangencies.empty());
        CHECK(scan.tangencies.front() ==
              doctest::Approx(M_PI).epsilon(1e-6));
    }
}

TEST_CASE("zero source: theta = d/t for the origin-based Lagrange solution") {
    int d = 3;
    TidalSource src = constant_source(Mat::Zero(d, d));
    RiccatiTrajectory traj =
        integrate_jacobi(src, Mat::Zero(d, d), Mat::Identity(d, d), 0.0, 5.0);
    for (double t : {0.5, 1.0, 2.5, 5.0})
        CHECK(traj.theta(t) == doctest::Approx(d / t).epsilon(1e-9));
    CHECK(traj.sigma_norm(2.0) < 1e-9);
    CHECK(traj.omega_norm(2.0) < 1e-9);
}

TEST_CASE("mixed-sign source diag(1,-1): det A = sin t sinh t") {
    int d = 2;
    Mat R = Mat::Zero(d, d);
    R(0, 0) = 1.0;
    R(1, 1) = -1.0;
    TidalSource src = constant_source(R);
    RiccatiTrajectory traj =
        integrate_jacobi(src, Mat::Zero(d, d), Mat::Identity(d, d), 0.0, 7.0);
    ConjugateScan scan = detect_conjugate(traj, 1e-3);
    REQUIRE(scan.zeros.size() == 2);
    CHECK(scan.zeros[0] == doctest::Approx(M_PI).epsilon(1e-8));
    CHECK(scan.zeros[1] == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK(traj.det_at(1.5) ==
          doctest::Approx(std::sin(1.5) * std::sinh(1.5)).epsilon(1e-9));
}

TEST_CASE("rank-deficient initial data is rejected") {
    int d = 2;
    TidalSource src = constant_source(Mat::Zero(d, d));
    Mat sing = Mat::Zero(d, d);
    sing(0, 0) = 1.0;
    CHECK_THROWS_AS(
        integrate_jacobi(src, Mat::Zero(d, d), sing, 0.0, 1.0),
        RankDeficientData);
    CHECK_THROWS_AS(constant_source([] {
        Mat M = Mat::Zero(2, 2);
        M(0, 1) = 1.0;
        return M;
    }()),
                    BadFrame);
}

TEST_CASE("Wronskian A^T Adot - Adot^T A is conserved; Lagrange data => omega = 0") {
    int d = 3;
    std::mt19937 rng(7);
    Mat S = sym_random(d, rng, 0.5);
    TidalSource src = function_source(d, [S](double t) {
        return Mat(S * std::cos(t));
    });
    Mat A0 = Mat::Identity(d, d);
    Mat Adot0(d, d);
    std::normal_distribution<double> dist(0.0, 0.4);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) Adot0(i, j) = dist(rng);
    RiccatiTrajectory traj = integrate_jacobi(src, A0, Adot0, 0.0, 3.0);
    Mat W0 = A0.transpose() * Adot0 - Adot0.transpose() * A0;
    for (double t : {0.7, 1.9, 3.0}) {
        Mat A = traj.A_at(t), Ad = traj.Adot_at(t);
        Mat W = A.transpose() * Ad - Ad.transpose() * A;
        CHECK((W - W0).norm() < 1e-8);
    }
    // The rotation part of B is W-driven; Lagrange data (W=0) keeps omega = 0.
    RiccatiTrajectory lag =
        integrate_jacobi(src, Mat::Zero(d, d), Mat::Identity(d, d), 0.0, 3.0);
    for (double t : {0.5, 1.5, 2.8})
        CHECK(lag.omega_norm(t) < 1e-8);
}

TEST_CASE("B from the Jacobi flow satisfies the matrix Riccati equation") {
    int d = 2;
    std::mt19937 rng(11);
    Mat S = sym_random(d, rng, 0.8);
    TidalSource src = function_source(d, [S](double t) {
        return Mat(S * (1.0 + 0.3 * std::sin(t)));
    });
    RiccatiTrajectory traj = integrate_jacobi(
        src, Mat::Identity(d, d), Mat(0.2 * Mat::Identity(d, d)), 0.0, 2.0);
    double h = 1e-5;
    for (double t : {0.4, 1.0, 1.7}) {
        Mat Bdot = (traj.B_at(t + h) - traj.B_at(t - h)) / (2.0 * h);
        Mat B = traj.B_at(t);
        Mat resid = Bdot + B * B + src.at(t);
        CHECK(resid.norm() < 1e-6);
    }
}

TEST_CASE("Raychaudhuri residual: synthetic constant source") {
    int d = 3;
    double c = 0.5;
    TidalSource src = constant_source(Mat(c * Mat::Identity(d, d)));
    // A = cos(sqrt(c) t) id: theta = -d sqrt(c) tan(sqrt(c) t), sigma = 0.
    RiccatiTrajectory traj = integrate_jacobi(
        src, Mat::Identity(d, d), Mat::Zero(d, d), 0.0, 1.5);
    double res = raychaudhuri_residual(
        traj, [c, d](double) { return d * c; }, 0.1, 1.4);
    CHECK(res < 1e-7);
}

TEST_CASE("Raychaudhuri residual: geometric source on a radial null geodesic") {
    MetricField g = schwarzschild(1.0);
    double r0 = 5.0, f0 = 1.0 - 2.0 / r0;
    GeodesicPath path = integrate_geodesic(
        g, vec4(0.0, r0, M_PI / 2.0, 0.0), vec4(1.0 / f0, 1.0, 0.0, 0.0), 0.0,
        10.0, 1e-11);
    NormalFrame frame =
        normal_frame(path, {vec4(0, 0, 1, 0), vec4(0, 0, 0, 1)});
    TidalSource src = geometric_source(path, frame);
    RiccatiTrajectory traj = integrate_jacobi(
        src, Mat::Identity(2, 2), Mat(0.1 * Mat::Identity(2, 2)), 0.0, 10.0,
        1e-10, 0.05);
    // Vacuum: Ric(gamma-dot, gamma-dot) = 0.
    double res = raychaudhuri_residual(traj, [](double) { return 0.0; }, 0.5,
                                       9.5, 60);
    CHECK(res < 1e-6);
}

TEST_CASE("closed-form comparison solutions: initial values and branches") {
    // Values at t = t1 follow from the printed normalisations.
    CHECK(comparison_solution(ComparisonKind::Cot, 2.0, 0.7, 1.0, 1.0, 3) ==
          doctest::Approx(3.0 * 0.7).epsilon(1e-12));
    CHECK(comparison_solution(ComparisonKind::Tanh, 4.0, 0.5, 0.0, 0.0, 2) ==
          doctest::Approx(2.0 * 0.5).epsilon(1e-12));
    CHECK(comparison_solution(ComparisonKind::Coth, 1.0, 6.0, 0.0, 0.0, 2) ==
          doctest::Approx(6.0).epsilon(1e-12));

    CHECK_THROWS_AS(comparison_solution(ComparisonKind::Cot, 1.0, 1.0, 0.0,
                                        10.0, 2),
                    BranchViolation);
    CHECK_THROWS_AS(comparison_solution(ComparisonKind::Tanh, 1.0, 1.5, 0.0,
                                        0.5, 2),
                    BranchViolation);
    CHECK_THROWS_AS(comparison_solution(ComparisonKind::Coth, 1.0, 0.5, 0.0,
                                        0.5, 2),
                    BranchViolation);
    CHECK_THROWS_AS(comparison_solution(ComparisonKind::Cot, -1.0, 1.0, 0.0,
                                        0.5, 2),
                    BranchViolation);
}

TEST_CASE("closed-form comparison solutions solve the scalar Riccati equation") {
    // Cot branch: Hdot = -d c - H^2/d; Tanh/Coth: Hdot = d C - H^2/d.
    double h = 1e-6;
    auto check_branch = [&](ComparisonKind kind, double k, double f, int d,
                            double t, double sign) {
        double Hm = comparison_solution(kind, k, f, 0.0, t - h, d);
        double Hp = comparison_solution(kind, k, f, 0.0, t + h, d);
        double H = comparison_solution(kind, k, f, 0.0, t, d);
        double lhs = (Hp - Hm) / (2.0 * h);
        double rhs = sign * d * k - H * H / d;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    };
    check_branch(ComparisonKind::Cot, 1.3, 0.4, 3, 0.5, -1.0);
    check_branch(ComparisonKind::Tanh, 2.0, 0.3, 2, 0.8, +1.0);
    check_branch(ComparisonKind::Coth, 1.5, 8.0, 2, 0.6, +1.0);
}

TEST_CASE("riccati_compare: equal sources give zero margin") {
    int d = 2;
    TidalSource s = constant_source(Mat(0.3 * Mat::Identity(d, d)));
    RiccatiCompareResult res =
        riccati_compare(s, s, Mat(0.1 * Mat::Identity(d, d)), 0.0, 1.0);
    CHECK(res.ordered);
    REQUIRE(!res.margin_curve.empty());
    for (auto& [t, m] : res.margin_curve) CHECK(std::abs(m) < 1e-8);
}

TEST_CASE("riccati_compare: id versus zero source, blowup at pi/2") {
    int d = 2;
    TidalSource s1 = constant_source(Mat::Identity(d, d));
    TidalSource s2 = constant_source(Mat::Zero(d, d));
    RiccatiCompareResult res =
        riccati_compare(s1, s2, Mat::Zero(d, d), 0.0, 2.0);
    CHECK(res.ordered);
    REQUIRE(res.blowup_time.has_value());
    CHECK(*res.blowup_time > M_PI / 2.0 - 0.1);
    // B1 = -tan(t) id, B2 = 0: margin = tan(t).
    for (auto& [t, m] : res.margin_curve) {
        if (t < 0.1 || t > 1.4) continue;
        CHECK(m == doctest::Approx(std::tan(t)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(riccati_compare(s1, s2, Mat::Zero(d, d), 0.0, 2.0, 1e-10,
                                    /*allow_blowup=*/false),
                    BlowUp);
}

TEST_CASE("riccati_compare: hypothesis check and a mixed-sign example") {
    int d = 2;
    Mat R1 = Mat::Zero(d, d);
    R1(0, 0) = 1.0;
    R1(1, 1) = -1.0;
    Mat R2 = Mat::Zero(d, d);
    R2(0, 0) = 0.5;
    R2(1, 1) = -2.0;
    TidalSource s1 = constant_source(R1), s2 = constant_source(R2);
    RiccatiCompareResult res = riccati_compare(
        s1, s2, Mat(0.1 * Mat::Identity(d, d)), 0.0, 1.0);
    CHECK(res.ordered);
    for (auto& [t, m] : res.margin_curve)
        CHECK(m > -1e-8);
    CHECK_THROWS_AS(
        riccati_compare(s2, s1, Mat(0.1 * Mat::Identity(d, d)), 0.0, 1.0),
        HypothesisViolated);
}

TEST_CASE("riccati_compare: monotonicity over seeded random ordered pairs") {
    int d = 3;
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 20; ++trial) {
        Mat S2 = sym_random(d, rng, 0.6);
        Mat P(d, d);
        std::normal_distribution<double> dist(0.0, 0.5);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) P(i, j) = dist(rng);
        Mat S1 = S2 + P * P.transpose(); // S1 >= S2
        Mat B0 = sym_random(d, rng, 0.2);
        RiccatiCompareResult res =
            riccati_compare(constant_source(S1), constant_source(S2), B0, 0.0,
                            0.3);
        CHECK(res.ordered);
    }
}

TEST_CASE("theta_bound_experiment: zero source satisfies the 4d/T bound") {
    int d = 3;
    TidalSource src = constant_source(Mat::Zero(d, d));
    ThetaBoundResult res = theta_bound_experiment(src, 2.0, 0.5);
    // A = (t+T) id: sup |theta| on [-r, r] is d/(T-r) = 2.
    CHECK(res.sup_theta_abs == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(res.bound == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(res.pass);
}

TEST_CASE("theta_bound_experiment: small negative source still passes") {
    int d = 2;
    double delta = 0.01;
    TidalSource src =
        constant_source(Mat(-(delta / d) * Mat::Identity(d, d)));
    ThetaBoundResult res = theta_bound_experiment(src, 2.0, 0.5);
    double a = std::sqrt(delta / d);
    double expect = d * a / std::tanh(a * (2.0 - 0.5));
    CHECK(res.sup_theta_abs == doctest::Approx(expect).epsilon(1e-6));
    CHECK(res.pass);
}

TEST_CASE("theta_bound_experiment: preconditions and conjugate points") {
    int d = 2;
    TidalSource zero = constant_source(Mat::Zero(d, d));
    CHECK_THROWS_AS(theta_bound_experiment(zero, 2.0, 1.0),
                    HypothesisViolated);
    CHECK_THROWS_AS(theta_bound_experiment(zero, 2.0, -0.1),
                    HypothesisViolated);
    double T = 2.0;
    double c = std::pow(M_PI / (1.9 * T), 2); // conjugate at t = 0.9 T < T
    TidalSource strong = constant_source(Mat(c * Mat::Identity(d, d)));
    CHECK_THROWS_AS(theta_bound_experiment(strong, T, 0.5),
                    ConjugateInWindow);
}

TEST_CASE("conjugate_window_experiment: strong damping kills the pair") {
    std::vector<ConjugateWindowRow> rows =
        conjugate_window_experiment(1.0, 1.0, 0.5, 2, {10.0}, {2.0, 3.0});
    REQUIRE(rows.size() == 2);
    for (auto& row : rows) CHECK(row.status == "none");
    CHECK_THROWS_AS(
        conjugate_window_experiment(1.0, 1.0, 0.8, 2, {1.0}, {2.0}),
        HypothesisViolated);
}

TEST_CASE("conjugate_window_experiment: weak damping keeps a conjugate pair") {
    // With negligible damping the focusing window at [-r, r] forces a zero of
    // det A beyond the window for large enough T.
    std::vector<ConjugateWindowRow> rows =
        conjugate_window_experiment(1.0, 1.0, 0.5, 2, {1e-3}, {4.0, 6.0});
    REQUIRE(rows.size() == 2);
    bool found_pair = false;
    for (auto& row : rows) {
        if (row.status == "pair") {
            found_pair = true;
            REQUIRE(row.conj1.has_value());
            REQUIRE(row.conj2.has_value());
            CHECK(*row.conj1 == -row.T);
            CHECK(*row.conj2 > -row.T);
            CHECK(*row.conj2 <= row.T);
        }
    }
    CHECK(found_pair);
}
