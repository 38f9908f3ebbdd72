#include "gms/girsanov.hpp"

#include <cmath>

namespace gms {

namespace {

double scalar(const Mat& m) { return m(0, 0); }

/// 1-D sigma_{n,k} of a basis element (the hat peak value).
double sigma1(const SchauderBasis& basis, int n, int k) {
    return basis.element(n, k).sigma_root(0, 0);
}

}  // namespace

ModelPair make_model_pair(const ProcessModel& model_a, const ProcessModel& model_b,
                          int max_level, FlowConfig cfg) {
    if (model_a.d != 1 || model_b.d != 1 || model_a.m != 1 || model_b.m != 1)
        throw ModelError("measure-change pairs are one-dimensional");

    ModelPair pair;
    // Detect differing diffusions on a probe grid; if they differ, rescale
    // the second process by the root ratio so both share gamma_root.
    double max_rel = 0.0;
    for (int i = 0; i <= 16; ++i) {
        const double t = i / 16.0;
        const double sa = scalar(model_a.gamma_root(t)), sb = scalar(model_b.gamma_root(t));
        if (!(sa > 0.0) || !(sb > 0.0))
            throw ModelError("gamma_root must stay positive for a model pair");
        max_rel = std::max(max_rel, std::abs(sa - sb) / sa);
    }

    ProcessModel reduced_b = model_b;
    if (max_rel > 1e-12) {
        if (!model_a.gamma_prime || !model_b.gamma_prime)
            throw ModelError("diffusion reduction needs differentiable Gamma on both models");
        auto ga = model_a.gamma_root, gb = model_b.gamma_root;
        auto gpa = model_a.gamma_prime, gpb = model_b.gamma_prime;
        auto ratio = [ga, gb](double t) { return scalar(ga(t)) / scalar(gb(t)); };
        // d/dt log gamma_root = Gamma' / (2 Gamma)
        auto dlog_ratio = [ga, gb, gpa, gpb](double t) {
            const double sa = scalar(ga(t)), sb = scalar(gb(t));
            return scalar(gpa(t)) / (2.0 * sa * sa) - scalar(gpb(t)) / (2.0 * sb * sb);
        };
        auto alpha_b = model_b.alpha;
        reduced_b = make_generic(
            1, 1,
            [alpha_b, dlog_ratio](double t) {
                return Mat::Constant(1, 1, scalar(alpha_b(t)) + dlog_ratio(t));
            },
            model_a.gamma_root);
        pair.reduced = true;
        pair.gamma_ratio = ratio;
    } else {
        pair.gamma_ratio = [](double) { return 1.0; };
    }

    const SupportTree tree = SupportTree::build(std::max(1, max_level));
    pair.basis_a = std::make_shared<SchauderBasis>(
        std::make_shared<FlowCache>(model_a, cfg), tree, max_level);
    pair.basis_b = std::make_shared<SchauderBasis>(
        std::make_shared<FlowCache>(reduced_b, cfg), tree, max_level);
    return pair;
}

LiftMatrices lift_matrix(const ModelPair& pair, int N) {
    if (N < 1 || N - 1 > pair.basis_a->max_level())
        throw RangeError("lift level out of range");
    LiftMatrices out;
    out.N = N;
    out.G = delta_matrix(*pair.basis_b, N) * psi_matrix(*pair.basis_a, N);
    out.H = delta_matrix(*pair.basis_a, N) * psi_matrix(*pair.basis_b, N);

    const auto order = pair.basis_a->ordered_indices(N - 1);
    out.nu.resize(order.size());
    out.det_g = 1.0;
    out.spectral_radius = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.nu[i] = sigma1(*pair.basis_a, order[i].n, order[i].k) /
                    sigma1(*pair.basis_b, order[i].n, order[i].k);
        out.det_g *= out.nu[i];
        out.spectral_radius = std::max(out.spectral_radius, std::abs(out.nu[i]));
    }
    return out;
}

double determinant_limit(const ModelPair& pair) {
    GaussLegendre gl(32);
    const auto& ma = pair.basis_a->flow().model();
    const auto& mb = pair.basis_b->flow().model();
    double integral = 0.0;
    for (int i = 0; i < 8; ++i)
        integral += gl.integrate_scalar(
            [&](double t) { return scalar(ma.alpha(t)) - scalar(mb.alpha(t)); }, i / 8.0,
            (i + 1) / 8.0);
    return std::exp(0.5 * integral);
}

std::vector<double> finite_determinants(const ModelPair& pair, int n_max) {
    if (n_max - 1 > pair.basis_a->max_level()) throw RangeError("determinant level out of range");
    std::vector<double> dets;
    double acc = 1.0;
    for (int n = 0; n < n_max; ++n) {
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k)
            acc *= sigma1(*pair.basis_a, n, k) / sigma1(*pair.basis_b, n, k);
        dets.push_back(acc);  // J_{n+1}: levels 0..n included
    }
    return dets;
}

RnWeight rn_derivative(const ModelPair& pair, const LiftMatrices& lift,
                       const CoefficientField& xi) {
    const auto order = pair.basis_a->ordered_indices(lift.N - 1);
    if (xi.depth() < lift.N - 1)
        throw RangeError("path coefficients shallower than the lift matrix");
    Vec x(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) x[i] = xi.at(order[i].n, order[i].k)[0];
    const Vec gx = lift.G * x;
    RnWeight out;
    out.log_weight = std::log(lift.det_g) - 0.5 * (gx.squaredNorm() - x.squaredNorm());
    out.weight = std::exp(out.log_weight);
    return out;
}

TraceDefect trace_defect(const ModelPair& pair, int N) {
    TraceDefect out;
    const LiftMatrices lift = lift_matrix(pair, N);
    out.finite_trace = (lift.G.transpose() * lift.G).trace() - double(lift.G.rows());

    const FlowCache& fa = pair.basis_a->flow();
    const auto& ma = fa.model();
    const auto& mb = pair.basis_b->flow().model();
    auto diff = [&](double t) { return scalar(ma.alpha(t)) - scalar(mb.alpha(t)); };
    GaussLegendre gl(32);
    double first = 0.0, second = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double a = i / 16.0, b = (i + 1) / 16.0;
        first += gl.integrate_scalar(diff, a, b);
        second += gl.integrate_scalar(
            [&](double t) {
                const double ft = scalar(fa.f(t));
                const double ht = scalar(fa.h0(0.0, t));
                const double dd = diff(t);
                return ht / (ft * ft) * dd * dd;
            },
            a, b);
    }
    out.limit_trace = first + second;
    return out;
}

double s_entry_by_quadrature(const ModelPair& pair, NodeIndex a, NodeIndex b) {
    const SchauderBasis& ba = *pair.basis_a;
    const FlowCache& fa = ba.flow();
    const auto& ma = fa.model();
    const auto& mb = pair.basis_b->flow().model();
    const BasisElement& ea = ba.element(a.n, a.k);
    const BasisElement& eb = ba.element(b.n, b.k);
    auto kernel = [&](const BasisElement& el, double t) {
        const double drift_gap = scalar(ma.alpha(t)) - scalar(mb.alpha(t));
        const double root = scalar(ma.gamma_root(t));
        return scalar(ba.eval_phi(el, t)) + drift_gap / root * scalar(ba.eval_psi(el, t));
    };
    // Integrate on the dyadic panels of the finer level so the piecewise
    // kernels are smooth inside every panel.
    const int level = std::max(std::max(a.n, b.n), 1);
    GaussLegendre gl(16);
    double acc = 0.0;
    const std::int64_t panels = std::int64_t(1) << level;
    for (std::int64_t i = 0; i < panels; ++i)
        acc += gl.integrate_scalar(
            [&](double t) { return kernel(ea, t) * kernel(eb, t); }, double(i) / panels,
            double(i + 1) / panels);
    return acc;
}

}  // namespace gms
