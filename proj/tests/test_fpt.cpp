#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gms/fpt.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace gms;

namespace {

std::shared_ptr<SchauderBasis> make_basis(const ProcessModel& mdl, int depth) {
    return std::make_shared<SchauderBasis>(std::make_shared<FlowCache>(mdl),
                                           SupportTree::build(std::max(1, depth)), depth);
}

}  // namespace

TEST_CASE("bridge crossing probabilities") {
    const FlowCache fl(make_wiener_1d());
    SUBCASE("already crossed endpoints") {
        CHECK(bridge_crossing_probability(fl, 1.2, 0.1, 0.0, 0.5, 1.0, 1.0) == 1.0);
        CHECK(bridge_crossing_probability(fl, 0.1, 1.0, 0.0, 0.5, 1.0, 1.0) == 1.0);
    }
    SUBCASE("pinned at zero over the unit interval") {
        CHECK(bridge_crossing_probability(fl, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0) ==
              doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    }
    SUBCASE("reflection formula with general endpoints") {
        const double a = 0.8, xl = 0.1, xr = -0.2, l = 0.25, r = 0.5;
        CHECK(bridge_crossing_probability(fl, xl, xr, l, r, a, a) ==
              doctest::Approx(std::exp(-2 * (a - xl) * (a - xr) / (r - l))).epsilon(1e-13));
    }
    SUBCASE("a remote boundary is never hit") {
        CHECK(bridge_crossing_probability(fl, 0.0, 0.0, 0.0, 1.0, 100.0, 100.0) < 1e-300);
    }
    SUBCASE("time change handles non-Wiener models") {
        const FlowCache ou(make_ou_1d(1.0, 1.0));
        const double p = bridge_crossing_probability(ou, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        const double eta = 0.5 * (1 - std::exp(-2.0));
        const double want = std::exp(-2.0 * (1.0 / std::exp(1.0)) * 1.0 / eta);
        CHECK(p == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("first passage of the Wiener process through level one") {
    auto basis = make_basis(make_wiener_1d(), 10);
    FptQuery q;
    q.level = 1.0;
    q.paths = 4000;
    q.coarse_depth = 4;
    q.max_depth = 10;
    q.seed = 99;
    q.threads = 2;
    FptStats stats;
    const auto records = first_passage(*basis, q, &stats);

    std::int64_t crossed = 0;
    std::vector<double> taus;
    for (const auto& rec : records)
        if (rec.crossed) {
            ++crossed;
            taus.push_back(0.5 * (rec.tau_lo + rec.tau_hi));
            CHECK(rec.tau_hi - rec.tau_lo <= 1.0 / 16 + 1e-12);
            CHECK(rec.tau_hi >= rec.tau_lo);
        }
    // crossing fraction ~ 2 Phi-bar(1) = 0.3173
    const double frac = double(crossed) / double(q.paths);
    CHECK(frac == doctest::Approx(0.3173).epsilon(0.15));
    // conditional FPT law from the reflection principle
    const double denom = oracle::wiener_fpt_cdf(1.0, 1.0);
    const double ks = oracle::ks_distance(
        taus, [&](double t) { return oracle::wiener_fpt_cdf(1.0, t) / denom; });
    CHECK(ks < 0.05);
    // adaptive refinement touches a small part of the full tree
    CHECK(stats.refined_nodes < stats.full_tree_nodes * 3 / 10);

    SUBCASE("crossing brackets straddle the boundary on the coupled full path") {
        int checked = 0;
        for (const auto& rec : records) {
            if (!rec.crossed || checked > 50) continue;
            const SamplePath full = sample_path(*basis, q.max_depth, q.seed,
                                                std::uint64_t(rec.path_id));
            const auto lo = std::lower_bound(full.times.begin(), full.times.end(), rec.tau_lo);
            const auto hi = std::lower_bound(full.times.begin(), full.times.end(), rec.tau_hi);
            REQUIRE(lo != full.times.end());
            REQUIRE(hi != full.times.end());
            const double x_lo = full.values[lo - full.times.begin()][0];
            const double x_hi = full.values[hi - full.times.begin()][0];
            if (x_hi >= q.level) {  // straddle-detected bracket
                CHECK(x_lo < q.level);
                CHECK(x_hi >= q.level);
                ++checked;
            }
        }
        CHECK(checked > 10);
    }
}

TEST_CASE("unreachable levels produce no crossings") {
    auto basis = make_basis(make_wiener_1d(), 8);
    FptQuery q;
    q.level = 10.0;
    q.paths = 500;
    q.coarse_depth = 3;
    q.max_depth = 8;
    q.seed = 7;
    FptStats stats;
    const auto records = first_passage(*basis, q, &stats);
    for (const auto& rec : records) CHECK(!rec.crossed);
    CHECK(stats.refined_nodes == 0);  // 2 Phi-bar(10) ~ 1.5e-23: nothing to refine
}

TEST_CASE("lowering the barrier never loses a crossing (coupled paths)") {
    auto basis = make_basis(make_wiener_1d(), 9);
    FptQuery hi_q, lo_q;
    hi_q.level = 1.0;
    lo_q.level = 0.8;
    hi_q.paths = lo_q.paths = 600;
    hi_q.coarse_depth = lo_q.coarse_depth = 3;
    hi_q.max_depth = lo_q.max_depth = 9;
    hi_q.seed = lo_q.seed = 12345;
    const auto high = first_passage(*basis, hi_q);
    const auto low = first_passage(*basis, lo_q);
    for (std::size_t i = 0; i < high.size(); ++i)
        if (high[i].crossed) CHECK(low[i].crossed);
}

TEST_CASE("time-dependent boundaries are frozen at interval endpoints") {
    auto basis = make_basis(make_wiener_1d(), 8);
    FptQuery q;
    q.level_fn = [](double t) { return 1.5 - t; };
    q.paths = 300;
    q.coarse_depth = 3;
    q.max_depth = 8;
    q.seed = 4;
    const auto records = first_passage(*basis, q);
    int crossed = 0;
    for (const auto& rec : records)
        if (rec.crossed) {
            ++crossed;
            CHECK(rec.tau_hi <= 1.0);
            CHECK(rec.tau_lo >= 0.0);
        }
    CHECK(crossed > 0);
    CHECK(crossed < 300);
}

TEST_CASE("half-space queries project multidimensional models") {
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    auto basis = make_basis(make_rotation(a, 1.0), 8);
    FptQuery q;
    q.level = 1.0;
    q.direction = Vec(2);
    q.direction << 1.0, 0.0;
    q.paths = 400;
    q.coarse_depth = 3;
    q.max_depth = 8;
    q.seed = 21;
    const auto records = first_passage(*basis, q);
    int crossed = 0;
    for (const auto& rec : records)
        if (rec.crossed) ++crossed;
    CHECK(crossed > 0);
    CHECK(crossed < 400);

    FptQuery lower = q;
    lower.level = 0.5;
    const auto more = first_passage(*basis, lower);
    int crossed_low = 0;
    for (const auto& rec : more)
        if (rec.crossed) ++crossed_low;
    CHECK(crossed_low >= crossed);
}

TEST_CASE("threshold validation") {
    auto basis = make_basis(make_wiener_1d(), 4);
    FptQuery q;
    q.p_low = 0.9;
    q.p_high = 0.1;
    q.max_depth = 4;
    CHECK_THROWS_AS((void)first_passage(*basis, q), RangeError);
}
