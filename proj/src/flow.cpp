#include "gms/flow.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace gms {

namespace {

// t^q - s^q as (t-s) sum t^a s^b: keeps relative accuracy on the short
// intervals of deep trees.
double power_gap(double s, double t, int q) {
    double sum = 0.0;
    for (int a = 0; a < q; ++a) sum += std::pow(t, a) * std::pow(s, q - 1 - a);
    return (t - s) * sum;
}

// (h_0(s,t))_{ij} for the (d-1)-integrated Wiener process; exact polynomial.
Mat iw_h0(int d, double s, double t) {
    Mat h(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int q = 2 * d - 1 - (i + j);
            double fact = 1.0;
            for (int p = 2; p <= d - 1 - i; ++p) fact *= p;
            for (int p = 2; p <= d - 1 - j; ++p) fact *= p;
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            h(i, j) = sign * power_gap(s, t, q) / (q * fact);
        }
    return h;
}

Mat iw_flow(int d, double s, double t) {
    Mat F = Mat::Identity(d, d);
    double p = 1.0;
    for (int off = 1; off < d; ++off) {
        p *= (t - s) / off;
        for (int i = 0; i + off < d; ++i) F(i, i + off) = p;
    }
    return F;
}

// Gamma/(2 alpha) (e^{-2 alpha s} - e^{-2 alpha t}), continuous at alpha -> 0;
// the expm1 form keeps relative accuracy on short intervals.
double ou_h0(double alpha, double gamma, double s, double t) {
    if (std::abs(alpha) < 1e-12) return gamma * (t - s);
    return -gamma / (2.0 * alpha) * std::exp(-2.0 * alpha * s) * std::expm1(-2.0 * alpha * (t - s));
}

}  // namespace

FlowCache::FlowCache(ProcessModel model, FlowConfig cfg)
    : model_(std::move(model)), cfg_(cfg), gl_(cfg.quadrature_order) {
    closed_form_ = !cfg_.force_generic &&
                   model_.specialization != Specialization::generic;
    if (closed_form_) return;

    // Memoize g and the cumulative h at a uniform anchor grid so later
    // evaluations only integrate across one panel.
    const int n = cfg_.flow_steps;
    g_anchor_.resize(n + 1);
    g_anchor_[0] = Mat::Identity(model_.d, model_.d);
    for (int i = 0; i < n; ++i)
        g_anchor_[i + 1] = integrate_flow(g_anchor_[i], double(i) / n, double(i + 1) / n);

    h_anchor_.resize(n + 1);
    h_anchor_[0] = Mat::Zero(model_.d, model_.d);
    for (int i = 0; i < n; ++i)
        h_anchor_[i + 1] = h_anchor_[i] + h0_local(double(i) / n, double(i + 1) / n);
}

void FlowCache::check_finite(const Mat& a, double t) const {
    if (!a.allFinite())
        throw ModelError("model coefficients are non-finite at t = " + std::to_string(t));
}

std::vector<double> FlowCache::split_points(double a, double b) const {
    std::vector<double> pts{a};
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (double bp : model_.breakpoints)
        if (bp > lo && bp < hi) pts.push_back(bp);
    if (a > b) std::reverse(pts.begin() + 1, pts.end());
    pts.push_back(b);
    return pts;
}

Mat FlowCache::integrate_flow(Mat y, double a, double b) const {
    auto rhs = [this](double u, const Mat& m) -> Mat {
        const Mat al = model_.alpha(u);
        check_finite(al, u);
        return al * m;
    };
    const std::vector<double> pts = split_points(a, b);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const int steps =
            std::max(1, int(std::ceil(std::abs(pts[i + 1] - pts[i]) * cfg_.flow_steps)));
        y = rk4_integrate(rhs, std::move(y), pts[i], pts[i + 1], steps);
    }
    return y;
}

Mat FlowCache::generic_g(double t) const {
    const int n = cfg_.flow_steps;
    int i = int(std::floor(t * n));
    if (i < 0) i = 0;
    if (i > n) i = n;
    const double ti = double(i) / n;
    if (t == ti) return g_anchor_[i];
    return integrate_flow(g_anchor_[std::min(i, n)], ti, t);
}

Mat FlowCache::flow(double s, double t) const {
    const int d = model_.d;
    if (s == t) return Mat::Identity(d, d);
    switch (closed_form_ ? model_.specialization : Specialization::generic) {
        case Specialization::wiener_1d:
            return Mat::Identity(1, 1);
        case Specialization::ou_constant_1d:
            return Mat::Constant(1, 1, std::exp(model_.ou_alpha * (t - s)));
        case Specialization::rotation:
            return Mat(((t - s) * model_.rot_alpha).exp());
        case Specialization::integrated_wiener:
            return iw_flow(d, s, t);
        case Specialization::generic:
        default:
            return integrate_flow(Mat::Identity(d, d), s, t);
    }
}

Mat FlowCache::g(double t) const {
    if (closed_form_) return flow(0.0, t);
    return generic_g(t);
}

Mat FlowCache::g_inv(double t) const {
    switch (closed_form_ ? model_.specialization : Specialization::generic) {
        case Specialization::wiener_1d:
            return Mat::Identity(1, 1);
        case Specialization::ou_constant_1d:
            return Mat::Constant(1, 1, std::exp(-model_.ou_alpha * t));
        case Specialization::rotation:
            return Mat(((-t) * model_.rot_alpha).exp());
        case Specialization::integrated_wiener:
            return iw_flow(model_.d, t, 0.0);
        case Specialization::generic:
        default: {
            const Mat gt = g(t);
            Eigen::PartialPivLU<Mat> lu(gt);
            const Mat inv = lu.inverse();
            const double cond = gt.cwiseAbs().rowwise().sum().maxCoeff() *
                                inv.cwiseAbs().rowwise().sum().maxCoeff();
            if (!inv.allFinite() || cond > cfg_.cond_bound)
                throw DegeneracyError("flow g(t) is near singular at t = " + std::to_string(t) +
                                      " (cond ~ " + std::to_string(cond) + ")");
            return inv;
        }
    }
}

Mat FlowCache::f(double t) const {
    return g_inv(t) * model_.gamma_root(t);
}

Mat FlowCache::h0_local(double s, double t) const {
    auto integrand = [this](double w) -> Mat {
        const Mat fw = f(w);
        return fw * fw.transpose();
    };
    const std::vector<double> pts = split_points(s, t);
    Mat acc = Mat::Zero(model_.d, model_.d);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        acc += gl_.integrate(integrand, pts[i], pts[i + 1]);
    return acc;
}

Mat FlowCache::h0(double s, double t) const {
    if (s > t) throw RangeError("h0 requires s <= t");
    const int d = model_.d;
    if (s == t) return Mat::Zero(d, d);
    Mat h;
    switch (closed_form_ ? model_.specialization : Specialization::generic) {
        case Specialization::wiener_1d:
            return Mat::Constant(1, 1, t - s);
        case Specialization::ou_constant_1d:
            return Mat::Constant(1, 1, ou_h0(model_.ou_alpha, model_.ou_gamma, s, t));
        case Specialization::rotation:
            // orthogonal flow: f f^T = sigma^2 I
            return Mat(model_.rot_sigma2 * (t - s) * Mat::Identity(d, d));
        case Specialization::integrated_wiener:
            h = iw_h0(d, s, t);
            break;
        case Specialization::generic:
        default: {
            const int n = cfg_.flow_steps;
            const int i0 = std::min(int(std::ceil(s * n)), n);
            const int i1 = std::max(int(std::floor(t * n)), 0);
            if (i0 > i1) {
                h = h0_local(s, t);  // both ends inside one panel
            } else {
                h = h_anchor_[i1] - h_anchor_[i0];
                if (s < double(i0) / n) h += h0_local(s, double(i0) / n);
                if (t > double(i1) / n) h += h0_local(double(i1) / n, t);
            }
            break;
        }
    }
    return 0.5 * (h + h.transpose());
}

Mat FlowCache::h_u(double u, double s, double t) const {
    const Mat gu = g(u);
    Mat h = gu * h0(s, t) * gu.transpose();
    return 0.5 * (h + h.transpose());
}

Mat FlowCache::covariance(double t, double s) const {
    return g(t) * h0(0.0, std::min(t, s)) * g(s).transpose();
}

}  // namespace gms
