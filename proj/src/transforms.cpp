#include "gms/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace gms {

CoefficientField::CoefficientField(int dim, int depth) : dim_(dim), depth_(depth) {
    if (dim < 1 || depth < 0) throw RangeError("coefficient field needs dim >= 1, depth >= 0");
    values_.resize(depth + 1);
    for (int n = 0; n <= depth; ++n)
        values_[n].assign(SupportTree::level_size(n), Vec::Zero(dim));
}

Vec& CoefficientField::at(int n, int k) {
    if (n < 0 || n > depth_ || k < 0 || k >= int(SupportTree::level_size(n)))
        throw RangeError("coefficient index (" + std::to_string(n) + "," + std::to_string(k) +
                         ") outside depth " + std::to_string(depth_));
    return values_[n][k];
}

const Vec& CoefficientField::at(int n, int k) const {
    return const_cast<CoefficientField*>(this)->at(n, k);
}

bool CoefficientField::all_finite() const {
    for (const auto& level : values_)
        for (const Vec& v : level)
            if (!v.allFinite()) return false;
    return true;
}

double CoefficientField::admissibility_delta(int n0) const {
    double delta = 0.0;
    for (int n = std::max(n0, 1); n <= depth_; ++n) {
        double peak = 0.0;
        for (const Vec& v : values_[n]) peak = std::max(peak, v.cwiseAbs().maxCoeff());
        if (peak > 1.0) delta = std::max(delta, 2.0 * std::log2(peak) / n);
    }
    return delta;
}

std::vector<double> grid_times(const SupportTree& tree, int depth) {
    if (depth < 0 || depth > tree.depth())
        throw RangeError("path depth outside partition depth");
    std::vector<double> pts{0.0, 1.0};
    for (int n = 1; n <= depth; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k)
            pts.push_back(tree.node(n, k).m);
    std::sort(pts.begin(), pts.end());
    return pts;
}

namespace {

std::size_t grid_index(const std::vector<double>& times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) throw InputError("time not on the stored grid");
    return std::size_t(it - times.begin());
}

}  // namespace

Vec construct(const SchauderBasis& basis, const CoefficientField& xi, double t) {
    if (xi.depth() > basis.max_level())
        throw RangeError("coefficient depth exceeds built basis level");
    Vec acc = basis.eval_psi(basis.element(0, 0), t) * xi.at(0, 0);
    // Descend the single chain of supports containing t; all other
    // elements vanish there, so the sum terminates in O(depth) terms.
    int k = 0;
    for (int n = 1; n <= xi.depth(); ++n) {
        const BasisElement& el = basis.element(n, k);
        acc += basis.eval_psi(el, t) * xi.at(n, k);
        k = t < el.m ? 2 * k : 2 * k + 1;
    }
    return acc;
}

CoefficientField coefficients(const SchauderBasis& basis, const std::vector<Vec>& grid_values,
                              int depth) {
    const std::vector<double> times = grid_times(basis.tree(), depth);
    if (grid_values.size() != times.size())
        throw InputError("grid has " + std::to_string(grid_values.size()) + " values, expected " +
                         std::to_string(times.size()));
    CoefficientField xi(basis.dim(), depth);
    const Vec zero = Vec::Zero(basis.dim());
    for (int n = 0; n <= depth; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
            const DualFunctional& fn = basis.dual(n, k);
            const Vec& xl = fn.l == 0.0 ? zero : grid_values[grid_index(times, fn.l)];
            const Vec& xm = grid_values[grid_index(times, fn.m)];
            const Vec& xr = grid_values[grid_index(times, fn.r)];
            xi.at(n, k) = fn.apply(xl, xm, xr);
        }
    return xi;
}

CoefficientField coefficients(const SchauderBasis& basis, const std::function<Vec(double)>& x,
                              int depth) {
    const std::vector<double> times = grid_times(basis.tree(), depth);
    std::vector<Vec> values(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) values[i] = x(times[i]);
    return coefficients(basis, values, depth);
}

namespace {

std::vector<double> matrix_points(const SchauderBasis& basis, int N,
                                  const std::vector<NodeIndex>& order) {
    std::vector<double> pts(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const NodeIndex& id = order[i];
        pts[i] = id.n == 0 ? 1.0 : basis.tree().node(id.n, id.k).m;
    }
    return pts;
}

}  // namespace

Mat psi_matrix(const SchauderBasis& basis, int N) {
    if (N < 1 || N - 1 > basis.max_level()) throw RangeError("psi_matrix level out of range");
    const int d = basis.dim();
    const auto order = basis.ordered_indices(N - 1);
    const auto pts = matrix_points(basis, N, order);
    const std::size_t nb = order.size();
    Mat out = Mat::Zero(d * nb, d * nb);
    for (std::size_t col = 0; col < nb; ++col) {
        const BasisElement& el = basis.element(order[col].n, order[col].k);
        for (std::size_t row = col; row < nb; ++row)  // structurally lower triangular
            out.block(d * row, d * col, d, d) = basis.eval_psi(el, pts[row]);
    }
    return out;
}

Mat delta_matrix(const SchauderBasis& basis, int N) {
    if (N < 1 || N - 1 > basis.max_level()) throw RangeError("delta_matrix level out of range");
    const int d = basis.dim();
    const auto order = basis.ordered_indices(N - 1);
    const auto pts = matrix_points(basis, N, order);
    std::unordered_map<double, std::size_t> col_of;
    for (std::size_t i = 0; i < pts.size(); ++i) col_of[pts[i]] = i;

    Mat out = Mat::Zero(d * order.size(), d * order.size());
    for (std::size_t row = 0; row < order.size(); ++row) {
        const DualFunctional& fn = basis.dual(order[row].n, order[row].k);
        if (fn.root) {
            out.block(d * row, d * col_of.at(1.0), d, d) = fn.w_r;
            continue;
        }
        out.block(d * row, d * col_of.at(fn.m), d, d) = fn.w_m;
        if (fn.l != 0.0) out.block(d * row, d * col_of.at(fn.l), d, d) -= fn.w_l;
        out.block(d * row, d * col_of.at(fn.r), d, d) -= fn.w_r;
    }
    return out;
}

Mat grid_covariance(const SchauderBasis& basis, int N) {
    const auto order = basis.ordered_indices(N - 1);
    const auto pts = matrix_points(basis, N, order);
    const int d = basis.dim();
    Mat out(d * pts.size(), d * pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            out.block(d * i, d * j, d, d) = basis.flow().covariance(pts[i], pts[j]);
    return out;
}

namespace {

Vec draw_normal(int dim, std::uint64_t seed, std::uint64_t stream, int n, int k) {
    Vec z(dim);
    for (int c = 0; c < dim; ++c) z[c] = normal_draw(seed, stream, n, k, c);
    return z;
}

}  // namespace

SamplePath sample_path(const SchauderBasis& basis, int depth, std::uint64_t seed,
                       std::uint64_t stream) {
    if (depth > basis.max_level()) throw RangeError("sample depth exceeds built basis level");
    const int d = basis.dim();
    SamplePath path;
    path.depth = depth;
    path.times = grid_times(basis.tree(), depth);
    path.values.assign(path.times.size(), Vec::Zero(d));
    path.xi = CoefficientField(d, depth);

    path.xi.at(0, 0) = draw_normal(d, seed, stream, 0, 0);
    path.values.back() = basis.element(0, 0).sigma_root * path.xi.at(0, 0);
    // Level by level, each midpoint is its bridge mean plus a fresh
    // conditional fluctuation: X(m) = mu_l X(l) + mu_r X(r) + sigma xi.
    for (int n = 1; n <= depth; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) {
            const BasisElement& el = basis.element(n, k);
            path.xi.at(n, k) = draw_normal(d, seed, stream, n, k);
            const Vec& xl = path.values[grid_index(path.times, el.l)];
            const Vec& xr = path.values[grid_index(path.times, el.r)];
            path.values[grid_index(path.times, el.m)] =
                el.mu_l_mid * xl + el.mu_r_mid * xr + el.sigma_root * path.xi.at(n, k);
        }
    return path;
}

SamplePath refine(const SchauderBasis& basis, const SamplePath& path,
                  const std::vector<int>& target_k, std::uint64_t seed, std::uint64_t stream) {
    if (target_k.empty()) return path;
    const int level = path.depth + 1;
    if (level > basis.max_level()) throw RangeError("refinement level exceeds built basis");
    for (int k : target_k)
        if (k < 0 || k >= int(SupportTree::level_size(level)))
            throw RangeError("refinement target k=" + std::to_string(k) +
                             " invalid at level " + std::to_string(level));

    SamplePath out;
    out.depth = level;
    out.times = grid_times(basis.tree(), level);
    out.values.assign(out.times.size(), Vec::Zero(basis.dim()));
    out.xi = CoefficientField(basis.dim(), level);
    for (int n = 0; n <= path.depth; ++n)
        for (int k = 0; k < int(SupportTree::level_size(n)); ++k) out.xi.at(n, k) = path.xi.at(n, k);
    for (std::size_t i = 0; i < path.times.size(); ++i)
        out.values[grid_index(out.times, path.times[i])] = path.values[i];

    std::vector<bool> drawn(SupportTree::level_size(level), false);
    for (int k : target_k) drawn[k] = true;
    for (int k = 0; k < int(SupportTree::level_size(level)); ++k) {
        const BasisElement& el = basis.element(level, k);
        const Vec& xl = out.values[grid_index(out.times, el.l)];
        const Vec& xr = out.values[grid_index(out.times, el.r)];
        Vec mid = el.mu_l_mid * xl + el.mu_r_mid * xr;
        if (drawn[k]) {
            out.xi.at(level, k) = draw_normal(basis.dim(), seed, stream, level, k);
            mid += el.sigma_root * out.xi.at(level, k);
        }
        out.values[grid_index(out.times, el.m)] = mid;
    }
    return out;
}

SamplePath refine_all(const SchauderBasis& basis, const SamplePath& path, std::uint64_t seed,
                      std::uint64_t stream) {
    std::vector<int> all(SupportTree::level_size(path.depth + 1));
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = int(k);
    return refine(basis, path, all, seed, stream);
}

PiecewiseFn apply_K(std::shared_ptr<const FlowCache> flow, PiecewiseFn u) {
    std::vector<double> bp = u.breakpoints;
    bp.insert(bp.begin(), 0.0);
    bp.push_back(1.0);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    GaussLegendre gl(flow->config().quadrature_order);
    auto integrand = [flow, eval = u.eval](double s) -> Mat { return flow->f(s) * eval(s); };
    // Cumulative integral of f u at each breakpoint.
    std::vector<Mat> cum(bp.size());
    cum[0] = integrand(0.0) * 0.0;
    for (std::size_t i = 1; i < bp.size(); ++i)
        cum[i] = cum[i - 1] + gl.integrate(integrand, bp[i - 1], bp[i]);

    PiecewiseFn out;
    out.breakpoints = u.breakpoints;
    out.eval = [flow, gl, integrand, bp, cum](double t) -> Mat {
        if (t <= 0.0) return Mat(cum[0]);
        const auto it = std::upper_bound(bp.begin(), bp.end(), std::min(t, 1.0));
        const std::size_t j = std::size_t(it - bp.begin()) - 1;
        Mat acc = cum[j];
        if (t > bp[j]) acc += gl.integrate(integrand, bp[j], std::min(t, 1.0));
        return flow->g(t) * acc;
    };
    return out;
}

PiecewiseFn apply_D(std::shared_ptr<const FlowCache> flow, PiecewiseFn u,
                    std::function<Mat(double)> du) {
    if (flow->noise_dim() != flow->dim())
        throw ModelError("apply_D needs m = d with invertible gamma_root");
    PiecewiseFn out;
    out.breakpoints = u.breakpoints;
    out.eval = [flow, eval = u.eval, du](double t) -> Mat {
        Mat deriv;
        if (du) {
            deriv = du(t);
        } else {
            const double eps = 1e-6;
            deriv = (eval(t + eps) - eval(t - eps)) / (2.0 * eps);
        }
        const Mat ft = flow->f(t);
        Eigen::PartialPivLU<Mat> lu(ft);
        const Mat f_inv = lu.inverse();
        if (!f_inv.allFinite()) throw DegeneracyError("f(t) singular in apply_D");
        return f_inv * flow->g_inv(t) * (deriv - flow->model().alpha(t) * eval(t));
    };
    return out;
}

}  // namespace gms
