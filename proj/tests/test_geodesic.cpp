#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lorlab/geodesic.hpp"

using namespace lorlab;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec4(double a, double b, double c, double d) {
    Vec v(4);
    v << a, b, c, d;
    return v;
}

} // namespace

TEST_CASE("Minkowski geodesics are straight lines") {
    MetricField g = minkowski(4);
    Vec x0 = Vec::Zero(4);
    Vec v0 = vec4(1, 0.5, 0, 0);
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, 5.0, 1e-12);
    for (double t : {0.7, 2.3, 5.0}) {
        CHECK((path.position(t) - t * v0).norm() < 1e-12);
        CHECK((path.velocity(t) - v0).norm() < 1e-12);
    }
    CHECK(path.events.empty());
    CHECK(path.norm_drift() < 1e-12);
}

TEST_CASE("Schwarzschild circular photon orbit stays at r = 3M") {
    MetricField g = schwarzschild(1.0);
    // Photon sphere: r = 3M, angular velocity dphi/dt = 1/sqrt(27) M^-1.
    Vec x0 = vec4(0.0, 3.0, M_PI / 2.0, 0.0);
    Vec v0 = vec4(1.0, 0.0, 0.0, 1.0 / std::sqrt(27.0));
    CHECK(classify_vector(g, x0, v0) == CausalClass::Null);
    double T = 2.0 * M_PI * std::sqrt(27.0); // one revolution in affine time
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, T, 1e-12);
    for (int i = 0; i <= 40; ++i) {
        double t = T * i / 40.0;
        CHECK(std::abs(path.position(t)[1] - 3.0) < 1e-6);
    }
    CHECK(path.position(T)[3] == doctest::Approx(2.0 * M_PI).epsilon(1e-7));
}

TEST_CASE("matched metric: one interface event, velocity continuous") {
    MetricField g = matched_metric(0.5);
    Vec x0 = vec2(0.0, -0.5);
    Vec v0 = vec2(2.0, 1.0); // timelike, crossing x = 0
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, 1.5, 1e-11);
    REQUIRE(path.events.size() == 1);
    double te = path.events[0];
    CHECK(std::abs(path.position(te)[1]) < 1e-10);
    Vec vm = path.velocity(te - 1e-9), vp = path.velocity(te + 1e-9);
    CHECK((vp - vm).norm() < 1e-9);
    CHECK(path.norm_drift() < 1e-9);

    // Event count equals the sign changes of the interface field.
    int sign_changes = 0;
    double prev = g.interface_fn(path.position(0.0));
    for (int i = 1; i <= 400; ++i) {
        double cur = g.interface_fn(path.position(1.5 * i / 400.0));
        if (prev * cur < 0.0) ++sign_changes;
        prev = cur;
    }
    CHECK(sign_changes == (int)path.events.size());
}

TEST_CASE("norm conservation on a Schwarzschild timelike orbit") {
    MetricField g = schwarzschild(1.0);
    Vec x0 = vec4(0.0, 8.0, M_PI / 2.0, 0.0);
    // Circular timelike orbit at r=8: dphi/dt = sqrt(M/r^3).
    double om = std::sqrt(1.0 / 512.0);
    double f = 1.0 - 2.0 / 8.0;
    double norm = f - 64.0 * om * om; // -g(v,v) for v=(1,0,0,om)
    Vec v0 = vec4(1.0, 0.0, 0.0, om) / std::sqrt(norm);
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, 50.0, 1e-10);
    CHECK(path.norm_squared(0.0) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(path.norm_drift() < 1e-9);
}

TEST_CASE("reparametrization and time reversal") {
    MetricField g = schwarzschild(1.0);
    Vec x0 = vec4(0.0, 6.0, M_PI / 2.0, 0.0);
    Vec v0 = vec4(1.5, 0.2, 0.0, 0.05);
    GeodesicPath p1 = integrate_geodesic(g, x0, v0, 0.0, 4.0, 1e-11);
    GeodesicPath p2 = integrate_geodesic(g, x0, Vec(2.0 * v0), 0.0, 2.0, 1e-11);
    for (double t : {0.5, 1.7}) CHECK((p1.position(2.0 * t) - p2.position(t)).norm() < 1e-8);

    GeodesicPath back = integrate_geodesic(g, p1.position(4.0),
                                           p1.velocity(4.0), 4.0, 0.0, 1e-11);
    CHECK((back.position(0.0) - x0).norm() < 1e-8);
}

TEST_CASE("geodesic leaving the chart raises LeftChart") {
    MetricField g = matched_metric(0.5);
    CHECK_THROWS_AS(
        integrate_geodesic(g, vec2(0.0, 0.5), vec2(2.0, 1.0), 0.0, 10.0),
        LeftChart);
}

TEST_CASE("parallel transport: constant in Minkowski, isometric in general") {
    MetricField g = schwarzschild(1.0);
    Vec x0 = vec4(0.0, 7.0, M_PI / 2.0, 0.0);
    Vec v0 = vec4(1.4, 0.3, 0.0, 0.04);
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, 10.0, 1e-11);
    Vec V0 = vec4(0.1, 1.0, 0.2, 0.0);
    Vec W0 = vec4(1.0, 0.0, 0.0, 0.1);
    auto moved = parallel_transport(path, {V0, W0}, 0.0, 10.0);
    Mat g0 = g.at(x0), g1 = g.at(path.position(10.0));
    Vec V1 = moved[0].eval(10.0), W1 = moved[1].eval(10.0);
    CHECK(V1.dot(g1 * W1) == doctest::Approx(V0.dot(g0 * W0)).epsilon(1e-9));
    CHECK(V1.dot(g1 * V1) == doctest::Approx(V0.dot(g0 * V0)).epsilon(1e-9));

    MetricField mink = minkowski(4);
    GeodesicPath line = integrate_geodesic(mink, Vec(Vec::Zero(4)),
                                           vec4(1, 0, 0, 0), 0.0, 3.0);
    Vec Vm = parallel_transport(line, {V0}, 0.0, 3.0)[0].eval(3.0);
    CHECK((Vm - V0).norm() < 1e-12);
}

TEST_CASE("space form holonomy around a small spatial loop is ~ K * area") {
    double K = 1.0, r = 0.1;
    MetricField g = space_form(K, 4);
    auto xs = [r](double s) {
        Vec x(4);
        x << 0.0, r * std::cos(s), r * std::sin(s), 0.0;
        return x;
    };
    auto xd = [r](double s) {
        Vec v(4);
        v << 0.0, -r * std::sin(s), r * std::cos(s), 0.0;
        return v;
    };
    Vec V0 = vec4(0, 1, 0, 0);
    Vec V1 = transport_along_curve(g, xs, xd, V0, 0.0, 2.0 * M_PI, 1e-12)
                 .eval(2.0 * M_PI);
    double angle = std::atan2(V1[2], V1[1]);
    CHECK(std::abs(std::abs(angle) - K * M_PI * r * r) <
          0.05 * K * M_PI * r * r);
}

TEST_CASE("normal_frame: Minkowski timelike and null cases") {
    MetricField g = minkowski(4);
    Vec x0 = Vec::Zero(4);
    std::vector<Vec> seeds{vec4(0, 1, 0, 0), vec4(0, 0, 1, 0), vec4(0, 0, 0, 1)};

    GeodesicPath tl = integrate_geodesic(g, x0, vec4(1, 0, 0, 0), 0.0, 2.0);
    NormalFrame ftl = normal_frame(tl, seeds);
    CHECK(ftl.d == 3);
    auto E = ftl.at(1.0);
    for (int i = 0; i < 3; ++i)
        CHECK((E[i] - seeds[i]).norm() < 1e-10);

    GeodesicPath nl = integrate_geodesic(g, x0, vec4(1, 1, 0, 0), 0.0, 2.0);
    NormalFrame fnl = normal_frame(nl, seeds);
    CHECK(fnl.d == 2);
    auto En = fnl.at(1.5);
    CHECK((En[0] - vec4(0, 0, 1, 0)).norm() < 1e-10);
    CHECK((En[1] - vec4(0, 0, 0, 1)).norm() < 1e-10);
    Vec N = fnl.companion_at(1.5);
    CHECK((N - vec4(0.5, -0.5, 0, 0)).norm() < 1e-10);

    // Degenerate seed set in the null case
    CHECK_THROWS_AS(normal_frame(nl, {vec4(1, 1, 0, 0), vec4(2, 2, 0, 0)}),
                    BadSeed);
}

TEST_CASE("normal_frame residuals on a Schwarzschild radial null geodesic") {
    MetricField g = schwarzschild(1.0);
    double r0 = 5.0, f0 = 1.0 - 2.0 / r0;
    Vec x0 = vec4(0.0, r0, M_PI / 2.0, 0.0);
    Vec v0 = vec4(1.0 / f0, 1.0, 0.0, 0.0); // outgoing radial null
    GeodesicPath path = integrate_geodesic(g, x0, v0, 0.0, 20.0, 1e-11);
    std::vector<Vec> seeds{vec4(0, 0, 1, 0), vec4(0, 0, 0, 1)};
    NormalFrame frame = normal_frame(path, seeds);
    REQUIRE(frame.d == 2);
    for (double t : {0.0, 5.0, 12.0, 20.0}) {
        Vec x = path.position(t), u = path.velocity(t);
        Mat gm = g.at(x);
        auto E = frame.at(t);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(E[i].dot(gm * u)) < 1e-8);
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(E[i].dot(gm * E[j]) - (i == j ? 1.0 : 0.0)) <
                      1e-8);
        }
        // Parallelism: compare FD derivative against -Gamma(u, E).
        if (t > 0.0 && t < 20.0) {
            double h = 1e-5;
            Christoffel gam = christoffel(g, x);
            for (int i = 0; i < 2; ++i) {
                Vec dE = (frame.at(t + h)[i] - frame.at(t - h)[i]) / (2.0 * h);
                Vec resid = dE;
                for (int a = 0; a < 4; ++a) resid[a] += u.dot(gam[a] * E[i]);
                CHECK(resid.norm() < 1e-6);
            }
        }
    }
}
