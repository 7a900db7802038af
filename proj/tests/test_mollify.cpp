#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lorlab/mollify.hpp"

using namespace lorlab;

namespace {

// 1+1 C11 metric with g_xx = 1 + beta x|x| (Lip(g_xx') = 2 beta).
MetricField profile_metric(double beta) {
    MetricField g;
    g.dim = 2;
    g.name = "profile";
    g.regularity = Regularity::C11;
    g.interface_fn = [](const Vec& x) { return x[1]; };
    g.components = [beta](const Vec& x) {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = -1.0;
        m(1, 1) = 1.0 + beta * x[1] * std::abs(x[1]);
        return m;
    };
    g.derivative = [beta](const Vec& x) {
        std::vector<Mat> d(2, Mat::Zero(2, 2));
        d[1](1, 1) = 2.0 * beta * std::abs(x[1]);
        return d;
    };
    g.chart_bounds = {{-5.0, 5.0}, {-1.0, 1.0}};
    return g;
}

} // namespace

TEST_CASE("kernel invariants: mass one, vanishing odd moments") {
    for (auto axes : std::vector<std::vector<int>>{{0}, {0, 1}}) {
        MollifierKernel k(0.1, axes);
        CHECK(std::abs(k.mass() - 1.0) < 1e-12);
        for (std::size_t a = 0; a < axes.size(); ++a)
            CHECK(std::abs(k.odd_moment((int)a)) < 1e-12);
        CHECK(!k.nodes.empty());
        for (double w : k.weights) CHECK(w > 0.0);
    }
    CHECK_THROWS_AS(MollifierKernel(0.0, {0}), ConfigInvalid);
    CHECK_THROWS_AS(MollifierKernel(-0.1, {0}), ConfigInvalid);
}

TEST_CASE("convolution is linear and exact on affine fields") {
    MollifierKernel k(0.15, {0, 1});
    auto f = [](const Vec& x) { return std::sin(x[0]) + x[1] * x[1]; };
    auto g = [](const Vec& x) { return std::cos(3.0 * x[0] - x[1]); };
    Vec x(2);
    x << 0.3, -0.2;
    double lhs = k.convolve(
        [&](const Vec& y) { return 2.0 * f(y) + 3.0 * g(y) + 5.0; }, x);
    double rhs = 2.0 * k.convolve(f, x) + 3.0 * k.convolve(g, x) + 5.0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));

    // Even kernel: affine fields are reproduced exactly.
    auto affine = [](const Vec& y) { return 1.0 + 0.3 * y[0] - 0.7 * y[1]; };
    CHECK(k.convolve(affine, x) == doctest::Approx(affine(x)).epsilon(1e-12));
}

TEST_CASE("smooth_metric: constant and affine metrics are unchanged") {
    MetricField g = minkowski(2);
    g.chart_bounds = {{-2, 2}, {-2, 2}};
    Region region{{{-1, 1}, {-1, 1}}};
    MollifierKernel k(0.1, {0, 1});
    MetricField ge = smooth_metric(g, k, region);
    Vec x(2);
    x << 0.4, -0.3;
    CHECK((ge.at(x) - g.at(x)).norm() < 1e-12);
    CHECK(ge.regularity == Regularity::Smooth);

    MetricField lin = minkowski(2);
    lin.chart_bounds = {{-2, 2}, {-2, 2}};
    lin.components = [](const Vec& y) {
        Mat m = Mat::Identity(2, 2);
        m(0, 0) = -1.0;
        m(1, 1) = 1.5 + 0.3 * y[1];
        return m;
    };
    MetricField le = smooth_metric(lin, k, region);
    CHECK((le.at(x) - lin.at(x)).norm() < 1e-12);
}

TEST_CASE("smoothing_report: convergence rates for the x|x| profile") {
    MetricField g = profile_metric(1.0);
    Region region{{{-0.5, 0.5}, {-0.6, 0.6}}};
    std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
    SmoothingReport rep = smoothing_report(g, ladder, region);
    REQUIRE(rep.eps_list.size() == 4);

    // O(eps^2) C0 convergence for even kernels: ratio ~ 1/4 per halving.
    for (std::size_t i = 1; i < 4; ++i) {
        double ratio = rep.c0_error[i] / rep.c0_error[i - 1];
        CHECK(ratio > 0.2);
        CHECK(ratio < 0.35);
    }
    // C1 error positive and strictly decreasing.
    CHECK(rep.c1_error[0] > 0.0);
    for (std::size_t i = 1; i < 4; ++i)
        CHECK(rep.c1_error[i] < rep.c1_error[i - 1]);
    // Second derivatives bounded uniformly in eps by Lip(g') = 2.
    for (double d2 : rep.d2_bound) {
        CHECK(d2 <= 2.05);
        CHECK(std::isfinite(d2));
    }
    // d_h(g_eps, g) < eps along the ladder.
    for (std::size_t i = 0; i < 4; ++i) CHECK(rep.dh_value[i] < ladder[i]);

    CHECK_THROWS_AS(smoothing_report(g, {0.1, 0.1}, region), ConfigInvalid);
    CHECK_THROWS_AS(smoothing_report(g, {0.05, 0.1}, region), ConfigInvalid);
}

TEST_CASE("smooth_metric enforces epsilon padding inside the chart") {
    MetricField g = profile_metric(1.0);
    MollifierKernel k(0.2, {1});
    CHECK_THROWS_AS(
        smooth_metric(g, k, Region{{{-0.5, 0.5}, {-0.95, 0.95}}}),
        PaddingViolation);
    CHECK_NOTHROW(smooth_metric(g, k, Region{{{-0.5, 0.5}, {-0.7, 0.7}}}));
    CHECK_THROWS_AS(smooth_metric(g, k, Region{}), EmptyRegion);
}

TEST_CASE("cone_adjusted nests the light cones strictly") {
    MetricField g = minkowski(2);
    Region r{{{-1, 1}, {-1, 1}}};
    MetricField narrow = cone_adjusted(g, 1.0, 0.2, true);
    MetricField wide = cone_adjusted(g, 1.0, 0.2, false);
    CHECK(cone_compare(narrow, g, r)); // narrow-cones inside g-cones
    CHECK(cone_compare(g, wide, r));
    CHECK_FALSE(cone_compare(g, narrow, r));
    CHECK_THROWS_AS(cone_adjusted(g, 10.0, 0.2, true), ConfigInvalid);
}

TEST_CASE("Friedrichs residual: constants give quadrature-level residual") {
    MollifierKernel k(0.1, {0});
    Region region{{{-1.0, 1.0}}};
    double res = friedrichs_residual(
        [](const Vec&) { return 2.0; }, [](const Vec&) { return -0.5; },
        [](double, const Vec&) { return 3.0; }, k, region);
    CHECK(res < 1e-10);
}

TEST_CASE("Friedrichs residual: sign * cos * id decreases along the ladder") {
    Region region{{{-1.0, 1.0}}};
    auto a = [](const Vec& x) { return x[0] >= 0.0 ? 1.0 : -1.0; };
    auto f = [](const Vec& x) { return std::cos(x[0]); };
    auto b = [](double, const Vec& x) { return x[0]; };
    std::vector<double> residuals;
    for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        MollifierKernel k(eps, {0});
        residuals.push_back(friedrichs_residual(a, f, b, k, region));
    }
    // The decay rate is exactly linear in eps (the peak at x=0 equals
    // eps * int |y| rho), i.e. one half per halving of eps.
    for (std::size_t i = 1; i < residuals.size(); ++i)
        CHECK(residuals[i] < residuals[i - 1]);
    CHECK(residuals.back() < 0.1 * residuals.front());

    MollifierKernel big(0.6, {0});
    CHECK_THROWS_AS(friedrichs_residual(a, f, b, big, Region{{{-0.5, 0.5}}}),
                    PaddingViolation);
}

TEST_CASE("Friedrichs companion: smoothed triple product stays above 0.45") {
    // a f b >= 0.5 pointwise: a in {1,3}, f = cos >= cos(1), b = 1.
    Region region{{{-1.0, 1.0}}};
    auto a = [](const Vec& x) { return x[0] >= 0.0 ? 3.0 : 1.0; };
    auto f = [](const Vec& x) { return std::cos(x[0]); };
    auto b = [](double, const Vec&) { return 1.0; };
    MollifierKernel k(0.05, {0});
    CHECK(friedrichs_product_min(a, f, b, k, region) > 0.45);
}

TEST_CASE("ricci_lowerbound_check: flat and mollified-flat metrics pass") {
    MetricField mink = minkowski(2);
    Region r{{{-1, 1}, {-1, 1}}};
    RicciBoundResult res =
        ricci_lowerbound_check(mink, r, -0.5, 2.0, 1e-6, 9, 20);
    CHECK(res.pass);

    // Mollified matched metric: the exact metric is flat (TCC holds with
    // equality on both sides), so the smoothed Ricci stays above -delta.
    MetricField g = matched_metric(0.5);
    MollifierKernel k(0.05, {1});
    MetricField ge = smooth_metric(g, k, Region{{{-0.6, 0.6}, {-0.7, 0.7}}});
    RicciBoundResult res2 = ricci_lowerbound_check(
        ge, Region{{{-0.4, 0.4}, {-0.5, 0.5}}}, -0.5, 2.0, 1e-2, 9, 20);
    CHECK(res2.pass);

    CHECK_THROWS_AS(ricci_lowerbound_check(mink, r, 0.5, 2.0, 1e-6),
                    ConfigInvalid);
}

TEST_CASE("ricci_lowerbound_check: cosh toy fails with a witness") {
    MetricField g = contracting_toy(scale_factor_cosh(), 2);
    Region r{{{-0.5, 0.5}, {-1, 1}}};
    RicciBoundResult res = ricci_lowerbound_check(g, r, -0.5, 2.0, 1e-2, 9, 20);
    CHECK_FALSE(res.pass);
    // Witness: Ric(X,X) = g(X,X) <= kappa in the 2D cosh toy.
    CHECK(res.worst.value < -0.4);
    Vec X = res.worst.vector;
    Mat gm = g.at(res.worst.point);
    CHECK(X.dot(gm * X) <= -0.5 + 1e-12);
}
