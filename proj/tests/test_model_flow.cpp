#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gms/flow.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace gms;

TEST_CASE("zero drift has the identity flow") {
    const FlowCache fl(make_wiener_1d());
    CHECK(fl.flow(0.2, 0.9)(0, 0) == 1.0);
    CHECK(fl.flow(0.37, 0.37)(0, 0) == 1.0);
}

TEST_CASE("rotation flow solves F' = alpha F") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    const FlowCache fl(make_rotation(a, 1.0));
    const double m = 0.25;
    for (double t : {0.3, 0.6, 0.95}) {
        const Mat F = fl.flow(m, t);
        // exp(tau a) = [[cos tau, sin tau], [-sin tau, cos tau]]
        CHECK(F(0, 0) == doctest::Approx(std::cos(t - m)).epsilon(1e-12));
        CHECK(F(0, 1) == doctest::Approx(std::sin(t - m)).epsilon(1e-12));
        CHECK(F(1, 0) == doctest::Approx(-std::sin(t - m)).epsilon(1e-12));
        // derivative check by central differences
        const double eps = 1e-6;
        const Mat dF = (fl.flow(m, t + eps) - fl.flow(m, t - eps)) / (2 * eps);
        CHECK((dF - a * F).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("integrated Wiener flow is the unit upper-triangular polynomial") {
    const FlowCache fl(make_integrated_wiener(2));
    const Mat F = fl.flow(0.2, 0.7);
    CHECK(F(0, 0) == 1.0);
    CHECK(F(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(F(1, 0) == 0.0);
    CHECK(F(1, 1) == 1.0);
}

TEST_CASE("generic diagonal drift matches the scalar closed form") {
    auto alpha = [](double t) { return Mat(t * Mat::Identity(2, 2)); };
    auto root = [](double) { return Mat(Mat::Identity(2, 2)); };
    const FlowCache fl(make_generic(2, 2, alpha, root));
    for (double t : {0.25, 0.5, 1.0}) {
        const double want = std::exp(0.5 * t * t);
        CHECK(fl.g(t)(0, 0) == doctest::Approx(want).epsilon(1e-10));
        CHECK(fl.g(t)(1, 1) == doctest::Approx(want).epsilon(1e-10));
        CHECK(std::abs(fl.g(t)(0, 1)) < 1e-14);
    }
}

TEST_CASE("flow chain rule and h additivity over random probes") {
    auto alpha = [](double t) {
        Mat a(2, 2);
        a << std::sin(t), 0.3, -0.2, 0.1 * t;
        return a;
    };
    auto root = [](double t) {
        Mat s(2, 2);
        s << 1.0, 0.0, 0.2 * t, 0.8;
        return s;
    };
    const FlowCache fl(make_generic(2, 2, alpha, root));
    for (int i = 0; i < 100; ++i) {
        const double u = oracle::normal_cdf(std::sin(i * 12.9898) * 43758.5453);
        const double v = oracle::normal_cdf(std::sin(i * 78.233) * 12543.123);
        double t0 = std::min(u, v), t2 = std::max(u, v);
        const double t1 = 0.5 * (t0 + t2);
        CHECK((fl.flow(t0, t2) - fl.flow(t1, t2) * fl.flow(t0, t1)).norm() < 1e-8);
        CHECK((fl.h0(t0, t2) - fl.h0(t0, t1) - fl.h0(t1, t2)).cwiseAbs().maxCoeff() < 1e-10);
        const Mat f = fl.flow(t1, t0);
        CHECK((fl.h_u(t0, t0, t2) - f * fl.h_u(t1, t0, t2) * f.transpose())
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);
    }
}

TEST_CASE("h kernel closed forms") {
    SUBCASE("wiener") {
        const FlowCache fl(make_wiener_1d());
        CHECK(fl.h0(0.25, 0.75)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("rotation h_u = sigma^2 (t-s) I") {
        Mat a(2, 2);
        a << 0, 2, -2, 0;
        const FlowCache fl(make_rotation(a, 1.7));
        const Mat h = fl.h_u(0.3, 0.1, 0.9);
        CHECK(h(0, 0) == doctest::Approx(1.7 * 0.8).epsilon(1e-12));
        CHECK(h(1, 1) == doctest::Approx(1.7 * 0.8).epsilon(1e-12));
        CHECK(std::abs(h(0, 1)) < 1e-12);
    }
    SUBCASE("integrated Wiener printed entries") {
        const int d = 2;
        const FlowCache fl(make_integrated_wiener(d));
        const double u = 0.0, s = 0.25, t = 0.875;
        const Mat h = fl.h_u(u, s, t);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const int q = 2 * d - 1 - (i + j);
                double fact = 1.0;
                for (int p = 2; p <= d - 1 - i; ++p) fact *= p;
                for (int p = 2; p <= d - 1 - j; ++p) fact *= p;
                const double want = ((i + j) % 2 ? -1.0 : 1.0) *
                                    (std::pow(t - u, q) - std::pow(s - u, q)) / (q * fact);
                CHECK(h(i, j) == doctest::Approx(want).epsilon(1e-12));
            }
    }
    SUBCASE("argument order is enforced") {
        const FlowCache fl(make_wiener_1d());
        CHECK_THROWS_AS((void)fl.h0(0.7, 0.2), RangeError);
    }
}

TEST_CASE("covariance closed forms and symmetry") {
    SUBCASE("wiener C(t,s) = min(t,s)") {
        const FlowCache fl(make_wiener_1d());
        CHECK(fl.covariance(0.3, 0.8)(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(fl.covariance(0.0, 0.0)(0, 0) == 0.0);
    }
    SUBCASE("OU variance as g^2 h") {
        const FlowCache fl(make_ou_1d(1.0, 1.0));
        const double t = 0.6;
        const double want = std::exp(2 * t) * 0.5 * (1 - std::exp(-2 * t));
        CHECK(fl.covariance(t, t)(0, 0) == doctest::Approx(want).epsilon(1e-13));
    }
    SUBCASE("transpose symmetry for a generic model") {
        auto alpha = [](double t) {
            Mat a(2, 2);
            a << 0.2, t, 0.0, -0.4;
            return a;
        };
        auto root = [](double) {
            Mat s(2, 2);
            s << 1.0, 0.0, 0.3, 0.9;
            return s;
        };
        const FlowCache fl(make_generic(2, 2, alpha, root));
        for (double t : {0.2, 0.5, 0.9})
            for (double s : {0.1, 0.6, 1.0})
                CHECK((fl.covariance(t, s) - fl.covariance(s, t).transpose())
                          .cwiseAbs()
                          .maxCoeff() < 1e-12);
    }
}

TEST_CASE("tagged models: generic evaluators agree with the closed forms") {
    std::vector<ProcessModel> models{make_wiener_1d(), make_ou_1d(1.0, 1.0),
                                     make_integrated_wiener(2)};
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    models.push_back(make_rotation(a, 0.5));
    for (const ProcessModel& mdl : models) {
        FlowConfig generic_cfg;
        generic_cfg.force_generic = true;
        const FlowCache exact(mdl);
        const FlowCache numeric(mdl, generic_cfg);
        for (double t : {0.1, 0.45, 0.8})
            for (double s : {0.05, 0.3}) {
                CHECK((exact.flow(s, t) - numeric.flow(s, t)).cwiseAbs().maxCoeff() < 1e-10);
                const double lo = std::min(s, t), hi = std::max(s, t);
                CHECK((exact.h0(lo, hi) - numeric.h0(lo, hi)).cwiseAbs().maxCoeff() < 1e-10);
            }
    }
}

TEST_CASE("model construction validates its parameters") {
    CHECK_THROWS_AS((void)make_ou_1d(1.0, 0.0), ModelError);
    CHECK_THROWS_AS((void)make_ou_1d(std::nan(""), 1.0), ModelError);
    Mat bad(2, 2);
    bad << 0, 1, 1, 0;  // symmetric, not antisymmetric
    CHECK_THROWS_AS((void)make_rotation(bad, 1.0), ModelError);
    CHECK_THROWS_AS((void)make_integrated_wiener(1), ModelError);
}

TEST_CASE("non-finite coefficients raise a model error") {
    auto alpha = [](double t) {
        return Mat(Mat::Constant(1, 1, t < 0.5 ? 0.0 : std::nan("")));
    };
    auto root = [](double) { return Mat(Mat::Ones(1, 1)); };
    CHECK_THROWS_AS(FlowCache(make_generic(1, 1, alpha, root)), ModelError);
}
