#include "gms/basis.hpp"

#include <cmath>
#include <string>
#include <thread>

namespace gms {

namespace {

std::string node_name(int n, int k) {
    return "(" + std::to_string(n) + "," + std::to_string(k) + ")";
}

/// Solve h x = b through the Cholesky factor of the SPD kernel h, with a
/// cheap condition estimate from the factor diagonal.
Mat h_solve(const Mat& h, const Mat& b, const std::string& where, double cond_bound) {
    Eigen::LLT<Mat> llt(h);
    if (llt.info() != Eigen::Success)
        throw DegeneracyError("noise kernel h is not positive definite at " + where);
    const Vec diag = Mat(llt.matrixL()).diagonal();
    const double ratio = diag.maxCoeff() / diag.minCoeff();
    if (ratio * ratio > cond_bound)
        throw DegeneracyError("noise kernel h is near singular at " + where +
                              " (cond >= " + std::to_string(ratio * ratio) + ")");
    return llt.solve(b);
}

}  // namespace

BridgeMoments bridge_moments(const FlowCache& flow, double t, double t_x, double t_z) {
    if (!(t_x < t_z)) throw RangeError("bridge requires t_x < t_z");
    if (t < t_x || t > t_z) throw RangeError("bridge time outside [t_x, t_z]");
    const Mat h_xz = flow.h0(t_x, t_z);
    const Mat h_xt = flow.h0(t_x, t);
    const Mat h_tz = flow.h0(t, t_z);
    const Mat gt = flow.g(t);

    BridgeMoments out;
    const std::string where =
        "bridge [" + std::to_string(t_x) + "," + std::to_string(t_z) + "]";
    const double bound = flow.config().cond_bound;
    const Mat sol_tz = h_solve(h_xz, h_tz, where, bound);  // h0(x,z)^{-1} h0(t,z)
    const Mat sol_xt = h_solve(h_xz, h_xt, where, bound);  // h0(x,z)^{-1} h0(x,t)
    out.sigma = gt * h_xt * sol_tz * gt.transpose();
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
    out.mu_l = gt * sol_tz.transpose() * flow.g_inv(t_x);
    out.mu_r = gt * sol_xt.transpose() * flow.g_inv(t_z);
    return out;
}

SchauderBasis::SchauderBasis(std::shared_ptr<const FlowCache> flow, SupportTree tree,
                             int max_level, int threads)
    : flow_(std::move(flow)), tree_(std::move(tree)), max_level_(max_level) {
    if (max_level < 0) throw RangeError("basis max_level must be >= 0");
    if (max_level > tree_.depth())
        throw RangeError("basis max_level exceeds partition depth");
    elements_.resize(max_level + 1);
    duals_.resize(max_level + 1);
    for (int n = 0; n <= max_level; ++n) {
        elements_[n].resize(SupportTree::level_size(n));
        duals_[n].resize(SupportTree::level_size(n));
    }

    // Per-node work is independent; split whole levels across a small pool.
    auto build_range = [this](int n, int k0, int k1) {
        for (int k = k0; k < k1; ++k) {
            elements_[n][k] = build_element(n, k);
            duals_[n][k] = build_dual(elements_[n][k]);
        }
    };
    if (threads <= 0) threads = 1;
    for (int n = 0; n <= max_level; ++n) {
        const int count = int(SupportTree::level_size(n));
        const int nt = std::min(threads, count);
        if (nt <= 1) {
            build_range(n, 0, count);
            continue;
        }
        std::vector<std::thread> pool;
        for (int w = 0; w < nt; ++w) {
            const int k0 = count * w / nt, k1 = count * (w + 1) / nt;
            pool.emplace_back(build_range, n, k0, k1);
        }
        for (auto& th : pool) th.join();
    }
}

BasisElement SchauderBasis::build_element(int n, int k) const {
    const FlowCache& fl = *flow_;
    BasisElement el;
    el.index = {n, k};

    if (n == 0) {
        // Root: sigma_00 sigma_00^T = C(1,1) = g(1) h(1) g(1)^T,
        // L_00 = h(0,1)^{-1} g(1)^{-1} sigma_00.
        el.l = 0.0;
        el.m = 1.0;
        el.r = 1.0;
        const Mat g1 = fl.g(1.0);
        const Mat h01 = fl.h0(0.0, 1.0);
        Mat cov = g1 * h01 * g1.transpose();
        cov = 0.5 * (cov + cov.transpose());
        Eigen::LLT<Mat> llt(cov);
        if (llt.info() != Eigen::Success)
            throw DegeneracyError("terminal covariance not positive definite");
        el.Sigma = cov;
        el.sigma_root = llt.matrixL();
        el.L = h_solve(h01, fl.g_inv(1.0) * el.sigma_root, "root", fl.config().cond_bound);
        el.R = el.L;
        el.M = el.L;
        el.mu_l_mid = Mat::Zero(fl.dim(), fl.dim());
        el.mu_r_mid = Mat::Identity(fl.dim(), fl.dim());
        return el;
    }

    const SupportTree::Node nd = tree_.node(n, k);
    el.l = nd.l;
    el.m = nd.m;
    el.r = nd.r;
    const Mat h_lm = fl.h0(nd.l, nd.m);
    const Mat h_mr = fl.h0(nd.m, nd.r);
    const Mat h_lr = fl.h0(nd.l, nd.r);
    const Mat gm = fl.g(nd.m);
    const Mat gm_inv = fl.g_inv(nd.m);

    const double bound = fl.config().cond_bound;
    // Sigma = g(m) [h(l,m) h(l,r)^{-1} h(m,r)] g(m)^T
    Mat core = h_lm * h_solve(h_lr, h_mr, node_name(n, k), bound);
    Mat sigma = gm * core * gm.transpose();
    sigma = 0.5 * (sigma + sigma.transpose());
    Eigen::LLT<Mat> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw DegeneracyError("conditional covariance not positive definite at node " +
                              node_name(n, k));
    el.Sigma = sigma;
    el.sigma_root = llt.matrixL();

    const Mat gs = gm_inv * el.sigma_root;
    el.L = h_solve(h_lm, gs, node_name(n, k), bound);
    el.R = h_solve(h_mr, gs, node_name(n, k), bound);
    el.M = el.L + el.R;

    el.mu_l_mid = gm * h_solve(h_lr, h_mr, node_name(n, k), bound).transpose() * fl.g_inv(nd.l);
    el.mu_r_mid = gm * h_solve(h_lr, h_lm, node_name(n, k), bound).transpose() * fl.g_inv(nd.r);
    return el;
}

DualFunctional SchauderBasis::build_dual(const BasisElement& el) const {
    DualFunctional fn;
    fn.index = el.index;
    fn.l = el.l;
    fn.m = el.m;
    fn.r = el.r;
    fn.root = (el.index.n == 0);
    if (fn.root) {
        fn.w_r = el.L.transpose() * flow_->g_inv(1.0);
        fn.w_m = fn.w_l = Mat::Zero(dim(), dim());
        return fn;
    }
    fn.w_m = el.M.transpose() * flow_->g_inv(el.m);
    fn.w_l = el.L.transpose() * flow_->g_inv(el.l);
    fn.w_r = el.R.transpose() * flow_->g_inv(el.r);
    return fn;
}

const BasisElement& SchauderBasis::element(int n, int k) const {
    if (n < 0 || n > max_level_ || k < 0 || k >= int(SupportTree::level_size(n)))
        throw RangeError("basis element " + node_name(n, k) + " not built (max level " +
                         std::to_string(max_level_) + ")");
    return elements_[n][k];
}

const DualFunctional& SchauderBasis::dual(int n, int k) const {
    element(n, k);  // range check
    return duals_[n][k];
}

Mat SchauderBasis::eval_psi(const BasisElement& el, double t) const {
    const int d = dim();
    if (el.index.n == 0) {
        if (t <= 0.0) return Mat::Zero(d, d);
        if (t >= 1.0) return el.sigma_root;
        return flow_->g(t) * flow_->h0(0.0, t) * el.L;
    }
    if (t <= el.l || t >= el.r) return Mat::Zero(d, d);
    if (t == el.m) return el.sigma_root;  // both branches agree here
    if (t < el.m) return flow_->g(t) * flow_->h0(el.l, t) * el.L;
    return flow_->g(t) * flow_->h0(t, el.r) * el.R;
}

Mat SchauderBasis::eval_phi(const BasisElement& el, double t) const {
    const int d = dim(), m = noise_dim();
    if (el.index.n == 0) {
        if (t < 0.0 || t >= 1.0) return Mat::Zero(m, d);
        return flow_->f(t).transpose() * el.L;
    }
    if (t < el.l || t >= el.r) return Mat::Zero(m, d);
    if (t < el.m) return flow_->f(t).transpose() * el.L;
    return Mat(-flow_->f(t).transpose() * el.R);
}

std::vector<NodeIndex> SchauderBasis::ordered_indices(int max_level) const {
    if (max_level > max_level_) throw RangeError("ordered_indices beyond built level");
    std::vector<NodeIndex> order;
    order.reserve(std::size_t(element_count(max_level)));
    for (int n = 0; n <= max_level; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) order.push_back({n, k});
    return order;
}

}  // namespace gms
