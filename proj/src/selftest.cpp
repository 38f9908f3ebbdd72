#include "gms/selftest.hpp"

#include "gms/rng.hpp"
#include "gms/transforms.hpp"

#include <cmath>

namespace gms {

namespace {

double uniform01(std::uint64_t seed, int i, int j) {
    return detail::to_unit(detail::mix(detail::mix(seed, i), j));
}

}  // namespace

std::vector<CheckResult> selftest(const ProcessModel& model, int depth, FlowConfig cfg) {
    std::vector<CheckResult> checks;
    auto flow = std::make_shared<FlowCache>(model, cfg);
    auto push = [&](const std::string& name, double value, double bound) {
        checks.push_back({name, value, bound, value <= bound});
    };

    // Flow identities over random probe triples.
    double chain = 0.0, additivity = 0.0, conjugation = 0.0, cov_sym = 0.0;
    for (int i = 0; i < 100; ++i) {
        double a = uniform01(7, i, 0), b = uniform01(7, i, 1), c = uniform01(7, i, 2);
        const double t0 = std::min({a, b, c}), t2 = std::max({a, b, c});
        const double t1 = a + b + c - t0 - t2;
        chain = std::max(chain,
                         (flow->flow(t0, t2) - flow->flow(t1, t2) * flow->flow(t0, t1)).norm());
        additivity = std::max(additivity, (flow->h0(t0, t2) - flow->h0(t0, t1) -
                                           flow->h0(t1, t2)).cwiseAbs().maxCoeff());
        const Mat f01 = flow->flow(t1, t0);
        conjugation = std::max(conjugation,
                               (flow->h_u(t0, t0, t2) -
                                f01 * flow->h_u(t1, t0, t2) * f01.transpose())
                                   .cwiseAbs()
                                   .maxCoeff());
        cov_sym = std::max(cov_sym, (flow->covariance(a, b) -
                                     flow->covariance(b, a).transpose()).cwiseAbs().maxCoeff());
    }
    push("flow chain rule", chain, 1e-8);
    push("h additivity", additivity, 1e-10);
    push("h conjugation", conjugation, 1e-8);
    push("covariance symmetry", cov_sym, 1e-10);
    push("flow at equal times", (flow->flow(0.37, 0.37) -
                                 Mat::Identity(model.d, model.d)).cwiseAbs().maxCoeff(), 0.0);

    const SupportTree tree = SupportTree::build(std::max(1, depth));
    SchauderBasis basis(flow, tree, depth);

    // Duality: the three-point functionals against sampled elements.
    double duality = 0.0;
    const auto order = basis.ordered_indices(depth);
    for (const NodeIndex& p : order)
        for (const NodeIndex& q : order) {
            const DualFunctional& fn = basis.dual(p.n, p.k);
            const BasisElement& el = basis.element(q.n, q.k);
            const Mat got = fn.apply(basis.eval_psi(el, fn.l), basis.eval_psi(el, fn.m),
                                     basis.eval_psi(el, fn.r));
            const Mat want = (p == q) ? Mat(Mat::Identity(model.d, model.d))
                                      : Mat(Mat::Zero(model.d, model.d));
            duality = std::max(duality, (got - want).cwiseAbs().maxCoeff());
        }
    push("duality Kronecker", duality, 1e-8);

    // Cholesky factorization of the grid covariance.
    const int N = depth + 1;
    const Mat psi = psi_matrix(basis, N);
    const Mat delta = delta_matrix(basis, N);
    const Mat cov = grid_covariance(basis, N);
    push("psi psi^T = grid covariance", (psi * psi.transpose() - cov).cwiseAbs().maxCoeff(),
         1e-8);
    push("delta psi = identity",
         (delta * psi - Mat::Identity(psi.rows(), psi.cols())).cwiseAbs().maxCoeff(), 1e-10);

    // Round trip on a random finite field.
    CoefficientField xi(model.d, depth);
    for (int n = 0; n <= depth; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k)
            for (int c = 0; c < model.d; ++c) xi.at(n, k)[c] = normal_draw(11, 0, n, k, c);
    const std::vector<double> times = grid_times(tree, depth);
    std::vector<Vec> grid(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) grid[i] = construct(basis, xi, times[i]);
    const CoefficientField back = coefficients(basis, grid, depth);
    double round_trip = 0.0;
    for (int n = 0; n <= depth; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k)
            round_trip = std::max(round_trip, (back.at(n, k) - xi.at(n, k)).cwiseAbs().maxCoeff());
    push("coefficient round trip", round_trip, 1e-10);

    return checks;
}

}  // namespace gms
