#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gms/basis.hpp"
#include "gms/quadrature.hpp"
#include "gms/transforms.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace gms;

namespace {

std::shared_ptr<SchauderBasis> make_basis(const ProcessModel& mdl, int depth) {
    return std::make_shared<SchauderBasis>(std::make_shared<FlowCache>(mdl),
                                           SupportTree::build(std::max(1, depth)), depth);
}

std::function<Mat(double, double)> cov_fn(const FlowCache& fl) {
    return [&fl](double t, double s) { return fl.covariance(t, s); };
}

}  // namespace

TEST_CASE("bridge moments against the Gaussian-conditioning oracle") {
    SUBCASE("wiener midpoint: Sigma = 1/4, weights = 1/2") {
        const FlowCache fl(make_wiener_1d());
        const BridgeMoments bm = bridge_moments(fl, 0.5, 0.0, 1.0);
        CHECK(bm.sigma(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(bm.mu_l(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(bm.mu_r(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("boundary pinning: t = t_x") {
        const FlowCache fl(make_ou_1d(0.7, 2.0));
        const BridgeMoments bm = bridge_moments(fl, 0.25, 0.25, 0.75);
        CHECK(bm.sigma(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(bm.mu_l(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(bm.mu_r(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("OU bridge equals the conditioning oracle") {
        const FlowCache fl(make_ou_1d(1.0, 1.0));
        const BridgeMoments bm = bridge_moments(fl, 0.5, 0.0, 1.0);
        const auto want = oracle::condition_bridge(cov_fn(fl), 1, 0.5, 0.0, 1.0);
        CHECK(bm.sigma(0, 0) == doctest::Approx(want.sigma(0, 0)).epsilon(1e-12));
        CHECK(bm.mu_r(0, 0) == doctest::Approx(want.mu_r(0, 0)).epsilon(1e-12));
        const double sinh_form = std::sinh(0.5) * std::sinh(0.5) / std::sinh(1.0);
        CHECK(bm.sigma(0, 0) == doctest::Approx(sinh_form).epsilon(1e-12));
    }
    SUBCASE("multidimensional bridge, interior pins") {
        const FlowCache fl(make_integrated_wiener(2));
        const BridgeMoments bm = bridge_moments(fl, 0.5, 0.25, 0.875);
        const auto want = oracle::condition_bridge(cov_fn(fl), 2, 0.5, 0.25, 0.875);
        CHECK((bm.sigma - want.sigma).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((bm.mu_l - want.mu_l).cwiseAbs().maxCoeff() < 1e-11);
        CHECK((bm.mu_r - want.mu_r).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("wiener elements are the classical triangular functions") {
    auto basis = make_basis(make_wiener_1d(), 5);
    const BasisElement& el10 = basis->element(1, 0);
    CHECK(el10.sigma_root(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    for (int n = 0; n <= 5; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
            const BasisElement& el = basis->element(n, k);
            for (int p = 0; p <= 64; ++p) {
                const double t = p / 64.0;
                CHECK(basis->eval_psi(el, t)(0, 0) ==
                      doctest::Approx(oracle::schauder_hat(n, k, t)).epsilon(1e-13));
            }
        }
    // Spot value from the closed form: element (2,1) at t = 5/8.
    CHECK(basis->eval_psi(basis->element(2, 1), 0.625)(0, 0) ==
          doctest::Approx(std::exp2(-1.5) * 0.5).epsilon(1e-14));
}

TEST_CASE("psi vanishes at the endpoints and peaks at sigma") {
    auto basis = make_basis(make_ou_1d(1.0, 1.0), 4);
    const BasisElement& el = basis->element(3, 3);
    CHECK(basis->eval_psi(el, el.l).cwiseAbs().maxCoeff() == 0.0);
    CHECK(basis->eval_psi(el, el.r).cwiseAbs().maxCoeff() == 0.0);
    CHECK((basis->eval_psi(el, el.m) - el.sigma_root).cwiseAbs().maxCoeff() == 0.0);
    CHECK(basis->eval_psi(el, el.r + 0.01).cwiseAbs().maxCoeff() == 0.0);
    // continuity across the midpoint
    const double eps = 1e-9;
    CHECK((basis->eval_psi(el, el.m - eps) - basis->eval_psi(el, el.m + eps))
              .cwiseAbs()
              .maxCoeff() < 1e-7);
}

TEST_CASE("element identities: M = L + R and Sigma inverse split") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    for (auto basis : {make_basis(make_ou_1d(1.0, 1.0), 4), make_basis(make_rotation(a, 0.5), 4),
                       make_basis(make_integrated_wiener(2), 4)}) {
        const FlowCache& fl = basis->flow();
        for (int n = 1; n <= 4; ++n)
            for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
                const BasisElement& el = basis->element(n, k);
                CHECK((el.M - el.L - el.R).cwiseAbs().maxCoeff() < 1e-10);
                const Mat lhs = el.Sigma.inverse();
                const Mat rhs = fl.h_u(el.m, el.l, el.m).inverse() +
                                fl.h_u(el.m, el.m, el.r).inverse();
                CHECK((lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff() < 1e-10);
                CHECK((el.sigma_root * el.sigma_root.transpose() - el.Sigma)
                          .cwiseAbs()
                          .maxCoeff() < 1e-12);
                // Cholesky convention: lower triangular, positive diagonal.
                const int d = basis->dim();
                for (int i = 0; i < d; ++i) {
                    CHECK(el.sigma_root(i, i) > 0.0);
                    for (int j = i + 1; j < d; ++j) CHECK(el.sigma_root(i, j) == 0.0);
                }
            }
    }
}

TEST_CASE("rotation elements factor into hat times rotation") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    const double sigma2 = 0.8;
    auto basis = make_basis(make_rotation(a, sigma2), 3);
    for (int n = 1; n <= 3; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
            const BasisElement& el = basis->element(n, k);
            for (double t : {el.l + 0.3 * (el.m - el.l), el.m, el.m + 0.7 * (el.r - el.m)}) {
                const Mat got = basis->eval_psi(el, t);
                const Mat want = std::sqrt(sigma2) * oracle::schauder_hat(n, k, t) *
                                 basis->flow().flow(el.m, t);
                CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
}

TEST_CASE("integrated Wiener sigma matches the conditioning oracle") {
    auto basis = make_basis(make_integrated_wiener(2), 3);
    const FlowCache& fl = basis->flow();
    for (int n = 1; n <= 3; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
            const BasisElement& el = basis->element(n, k);
            const auto want = oracle::condition_bridge(cov_fn(fl), 2, el.m, el.l, el.r);
            CHECK((el.Sigma - want.sigma).cwiseAbs().maxCoeff() < 1e-12);
            // Dyadic midpoints give a diagonal Sigma: sigma = diag of
            // sqrt((r-l)^3/192), sqrt((r-l)/16).
            const double w = el.r - el.l;
            CHECK(el.sigma_root(0, 0) == doctest::Approx(std::sqrt(w * w * w / 192.0)));
            CHECK(el.sigma_root(1, 1) == doctest::Approx(std::sqrt(w / 16.0)));
            CHECK(std::abs(el.sigma_root(1, 0)) < 1e-14);
        }
}

TEST_CASE("phi is the Haar system for the Wiener model") {
    auto basis = make_basis(make_wiener_1d(), 4);
    for (int n = 0; n <= 4; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
            const BasisElement& el = basis->element(n, k);
            for (int p = 0; p < 64; ++p) {
                const double t = (p + 0.5) / 64.0;
                CHECK(basis->eval_phi(el, t)(0, 0) ==
                      doctest::Approx(oracle::haar_step(n, k, t)).epsilon(1e-13));
            }
        }
}

TEST_CASE("phi complements psi: psi' = alpha psi + gamma_root phi") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    for (auto basis : {make_basis(make_ou_1d(1.0, 1.0), 3), make_basis(make_rotation(a, 0.5), 3),
                       make_basis(make_integrated_wiener(2), 3)}) {
        const ProcessModel& mdl = basis->flow().model();
        for (int n = 1; n <= 3; ++n) {
            const int k = (n == 1) ? 0 : 1;
            const BasisElement& el = basis->element(n, k);
            for (double frac : {0.31, 0.77}) {
                for (double t : {el.l + frac * (el.m - el.l), el.m + frac * (el.r - el.m)}) {
                    const double eps = 1e-6;
                    const Mat fd =
                        (basis->eval_psi(el, t + eps) - basis->eval_psi(el, t - eps)) / (2 * eps);
                    const Mat want =
                        mdl.alpha(t) * basis->eval_psi(el, t) +
                        mdl.gamma_root(t) * basis->eval_phi(el, t);
                    CHECK((fd - want).cwiseAbs().maxCoeff() < 1e-5);
                }
            }
        }
    }
}

TEST_CASE("duality: the three-point functionals extract unit coefficients") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    for (auto basis : {make_basis(make_wiener_1d(), 4), make_basis(make_rotation(a, 0.5), 4)}) {
        const int d = basis->dim();
        const auto order = basis->ordered_indices(4);
        for (const NodeIndex& p : order)
            for (const NodeIndex& q : order) {
                const DualFunctional& fn = basis->dual(p.n, p.k);
                const BasisElement& el = basis->element(q.n, q.k);
                const Mat got = fn.apply(basis->eval_psi(el, fn.l), basis->eval_psi(el, fn.m),
                                         basis->eval_psi(el, fn.r));
                const Mat want = (p == q) ? Mat(Mat::Identity(d, d)) : Mat(Mat::Zero(d, d));
                CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8);
            }
        // zero input gives the zero coefficient
        const DualFunctional& fn = basis->dual(2, 1);
        const Vec zv = Vec::Zero(d);
        CHECK(fn.apply(zv, zv, zv).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("phi columns are orthonormal in quadrature") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    for (auto basis : {make_basis(make_ou_1d(1.0, 1.0), 3), make_basis(make_rotation(a, 0.5), 3)}) {
        const int d = basis->dim();
        const auto order = basis->ordered_indices(3);
        GaussLegendre gl(8);
        const int panels = 16;
        for (const NodeIndex& p : order)
            for (const NodeIndex& q : order) {
                Mat acc = Mat::Zero(d, d);
                const BasisElement& ep = basis->element(p.n, p.k);
                const BasisElement& eq = basis->element(q.n, q.k);
                for (int i = 0; i < panels; ++i)
                    acc += gl.integrate(
                        [&](double t) -> Mat {
                            return basis->eval_phi(ep, t).transpose() * basis->eval_phi(eq, t);
                        },
                        double(i) / panels, double(i + 1) / panels);
                const Mat want = (p == q) ? Mat(Mat::Identity(d, d)) : Mat(Mat::Zero(d, d));
                CHECK((acc - want).cwiseAbs().maxCoeff() < 1e-6);
            }
    }
}

TEST_CASE("truncated kernel sums converge on smooth targets") {
    // v = f^T w for a smooth w; the projection onto levels <= N must have
    // monotonically shrinking L2 residual.
    auto basis = make_basis(make_wiener_1d(), 6);
    auto v = [](double t) { return std::sin(2 * M_PI * t) + 0.5 * t; };
    GaussLegendre gl(8);
    const int panels = 128;
    double prev = std::numeric_limits<double>::infinity();
    for (int N = 2; N <= 6; ++N) {
        const auto order = basis->ordered_indices(N);
        std::vector<double> coeff;
        for (const NodeIndex& id : order) {
            const BasisElement& el = basis->element(id.n, id.k);
            double acc = 0.0;
            for (int i = 0; i < panels; ++i)
                acc += gl.integrate_scalar(
                    [&](double t) { return basis->eval_phi(el, t)(0, 0) * v(t); },
                    double(i) / panels, double(i + 1) / panels);
            coeff.push_back(acc);
        }
        double residual = 0.0;
        for (int i = 0; i < panels; ++i)
            residual += gl.integrate_scalar(
                [&](double t) {
                    double approx = 0.0;
                    for (std::size_t j = 0; j < order.size(); ++j)
                        approx += basis->eval_phi(basis->element(order[j].n, order[j].k), t)(0, 0) *
                                  coeff[j];
                    const double diff = v(t) - approx;
                    return diff * diff;
                },
                double(i) / panels, double(i + 1) / panels);
        CHECK(residual < prev);
        prev = residual;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("innovation covariance matches mu Sigma mu^T within 4 SE") {
    auto basis = make_basis(make_wiener_1d(), 2);
    const FlowCache& fl = basis->flow();
    const int draws = 100000;
    const double t = 0.2, s = 0.4, far = 0.7;  // t,s in S_{2,0}; far in S_{2,1}
    auto interp = [&](const std::vector<double>& times, const std::vector<Vec>& values,
                      double at) {
        auto it = std::upper_bound(times.begin(), times.end(), at);
        const std::size_t j = std::size_t(it - times.begin());
        const BridgeMoments bm = bridge_moments(fl, at, times[j - 1], times[j]);
        return (bm.mu_l * values[j - 1] + bm.mu_r * values[j])(0);
    };
    std::vector<double> dt(draws), ds(draws), dfar(draws);
    for (int i = 0; i < draws; ++i) {
        const SamplePath coarse = sample_path(*basis, 1, 99, i);
        const SamplePath fine = refine_all(*basis, coarse, 99, i);
        dt[i] = interp(fine.times, fine.values, t) - interp(coarse.times, coarse.values, t);
        ds[i] = interp(fine.times, fine.values, s) - interp(coarse.times, coarse.values, s);
        dfar[i] = interp(fine.times, fine.values, far) - interp(coarse.times, coarse.values, far);
    }
    const BasisElement& el = basis->element(2, 0);
    const double want_same =
        basis->eval_psi(el, t)(0, 0) * basis->eval_psi(el, s)(0, 0);
    std::vector<double> prod(draws), cross(draws);
    for (int i = 0; i < draws; ++i) {
        prod[i] = dt[i] * ds[i];
        cross[i] = dt[i] * dfar[i];
    }
    const auto same = oracle::mean_var(prod);
    CHECK(std::abs(same.mean - want_same) < 4 * same.se);
    const auto indep = oracle::mean_var(cross);
    CHECK(std::abs(indep.mean) < 4 * indep.se);
}

TEST_CASE("a ratio-bounded custom partition supports the full pipeline") {
    auto skew = [](double l, double r) { return l + 0.4 * (r - l); };
    const SupportTree tree = SupportTree::build(4, PartitionKind::custom, skew, 0.75);
    auto flow = std::make_shared<FlowCache>(make_ou_1d(0.8, 1.5));
    auto basis = std::make_shared<SchauderBasis>(flow, tree, 4);

    // duality survives the uneven midpoints
    const auto order = basis->ordered_indices(4);
    for (const NodeIndex& p : order)
        for (const NodeIndex& q : order) {
            const DualFunctional& fn = basis->dual(p.n, p.k);
            const BasisElement& el = basis->element(q.n, q.k);
            const double got = fn.apply(basis->eval_psi(el, fn.l), basis->eval_psi(el, fn.m),
                                        basis->eval_psi(el, fn.r))(0, 0);
            CHECK(got == doctest::Approx(p == q ? 1.0 : 0.0).epsilon(1e-9));
        }

    // Cholesky identity and exact round trip on the custom grid
    const Mat psi = psi_matrix(*basis, 5);
    const Mat cov = grid_covariance(*basis, 5);
    CHECK((psi * psi.transpose() - cov).cwiseAbs().maxCoeff() < 1e-10);

    CoefficientField xi(1, 4);
    for (int n = 0; n <= 4; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k)
            xi.at(n, k)[0] = normal_draw(8, 8, n, k, 0);
    const std::vector<double> times = grid_times(tree, 4);
    std::vector<Vec> grid(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) grid[i] = construct(*basis, xi, times[i]);
    const CoefficientField back = coefficients(*basis, grid, 4);
    for (int n = 0; n <= 4; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k)
            CHECK(back.at(n, k)[0] == doctest::Approx(xi.at(n, k)[0]).epsilon(1e-11));
}

TEST_CASE("deep stiff chains trip the kernel condition guard") {
    // h on the short supports of the thrice-integrated chain spans ~delta^4
    // in scale; past the configured bound the build must refuse.
    auto flow = std::make_shared<FlowCache>(make_integrated_wiener(3));
    CHECK_THROWS_AS(SchauderBasis(flow, SupportTree::build(10), 10), DegeneracyError);
    SchauderBasis ok(flow, SupportTree::build(5), 5);  // comfortably conditioned
    CHECK(ok.element(5, 7).sigma_root(0, 0) > 0.0);
}
