#include "gms/interp.hpp"

#include <algorithm>
#include <cmath>

namespace gms {

namespace {

Mat numeric_derivative(const std::function<Mat(double)>& fn, double t) {
    const double eps = 1e-6;
    return (fn(t + eps) - fn(t - eps)) / (2.0 * eps);
}

}  // namespace

double dirichlet_energy(std::shared_ptr<const FlowCache> flow, const PiecewiseFn& x,
                        std::function<Mat(double)> dx, int panels) {
    if (flow->noise_dim() != flow->dim())
        throw ModelError("dirichlet_energy needs m = d with invertible gamma_root");
    std::vector<double> grid;
    for (int i = 0; i <= panels; ++i) grid.push_back(double(i) / panels);
    grid.insert(grid.end(), x.breakpoints.begin(), x.breakpoints.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    GaussLegendre gl(flow->config().quadrature_order);
    auto density = [&](double t) -> double {
        const Mat xt = x.eval(t);
        const Mat deriv = dx ? dx(t) : numeric_derivative(x.eval, t);
        const Mat lx = flow->f(t).inverse() * flow->g_inv(t) *
                       (deriv - flow->model().alpha(t) * xt);
        return lx.squaredNorm();
    };
    double energy = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        energy += gl.integrate_scalar(density, grid[i], grid[i + 1]);
    return energy;
}

Interpolant optimal_interpolant(const InterpolationProblem& problem) {
    if (!problem.basis) throw InputError("interpolation problem lacks a basis");
    const auto& basis = *problem.basis;
    const std::vector<double> times = grid_times(basis.tree(), problem.depth);
    if (problem.data.size() != times.size())
        throw InputError("interpolation data size mismatch: got " +
                         std::to_string(problem.data.size()) + ", expected " +
                         std::to_string(times.size()));
    if (problem.data.front().cwiseAbs().maxCoeff() > 0.0)
        throw InputError("interpolation data must vanish at t = 0");
    Interpolant out;
    out.basis = problem.basis;
    out.xi = coefficients(basis, problem.data, problem.depth);
    return out;
}

namespace {

/// Dense RK4 trajectory of a linear matrix system Y' = C(t) Y on [a,b].
class DenseLinearFlow {
public:
    DenseLinearFlow(std::function<Mat(double)> companion, Mat y0, double a, double b, int steps)
        : companion_(std::move(companion)), a_(a), b_(b), steps_(steps) {
        states_.reserve(steps + 1);
        states_.push_back(std::move(y0));
        auto rhs = [this](double t, const Mat& y) -> Mat { return companion_(t) * y; };
        const double h = (b - a) / steps;
        for (int i = 0; i < steps; ++i)
            states_.push_back(rk4_integrate(rhs, states_.back(), a + i * h, a + (i + 1) * h, 1));
    }

    Mat at(double t) const {
        auto rhs = [this](double u, const Mat& y) -> Mat { return companion_(u) * y; };
        const double h = (b_ - a_) / steps_;
        int i = int(std::floor((t - a_) / h));
        i = std::clamp(i, 0, steps_);
        const double ti = a_ + i * h;
        if (t == ti) return states_[i];
        return rk4_integrate(rhs, states_[i], ti, t, 1);
    }

private:
    std::function<Mat(double)> companion_;
    double a_, b_;
    int steps_;
    std::vector<Mat> states_;
};

struct CompanionSystem {
    std::function<Mat(double)> matrix;  ///< the 2d x 2d (or 2d-chain) system
    int order = 2;    ///< rows per derivative block (d) and block count
    bool chain = false;  ///< integrated-Wiener scalar chain state
};

/// Euler-Lagrange companion system. For invertible Gamma this is the
/// second-order system u'' = Bh u + Ah u'; for the integrated-Wiener
/// chain it is the scalar equation v^(2d) = 0 written first-order.
CompanionSystem make_companion(const FlowCache& flow) {
    const ProcessModel& mdl = flow.model();
    const int d = mdl.d;
    CompanionSystem sys;
    if (mdl.specialization == Specialization::integrated_wiener) {
        sys.chain = true;
        Mat shift = Mat::Zero(2 * d, 2 * d);
        for (int i = 0; i + 1 < 2 * d; ++i) shift(i, i + 1) = 1.0;
        sys.matrix = [shift](double) { return shift; };
        return sys;
    }
    if (mdl.m != d)
        throw ModelError("Euler-Lagrange route needs invertible Gamma (m = d)");
    if (!mdl.has_derivatives())
        throw ModelError("Euler-Lagrange route needs differentiable alpha and Gamma");
    sys.matrix = [&mdl, d](double t) -> Mat {
        const Mat a = mdl.alpha(t);
        const Mat gam = mdl.gamma(t);
        const Mat p = gam.ldlt().solve(a.transpose() * gam - mdl.gamma_prime(t));
        Mat c = Mat::Zero(2 * d, 2 * d);
        c.block(0, d, d, d) = Mat::Identity(d, d);
        c.block(d, 0, d, d) = p * a + mdl.alpha_prime(t);  // u'' coefficient of u
        c.block(d, d, d, d) = a - p;                       // coefficient of u'
        return c;
    };
    return sys;
}

/// mu on [a,b] with mu(a) = ua, mu(b) = ub, via shooting: the unknown
/// initial derivative block solves a d x d linear system.
struct SideSolution {
    std::shared_ptr<DenseLinearFlow> dense;
    bool chain;
    int d;
    Mat mu(double t) const { return dense->at(t).topRows(d); }
    Mat dmu(double t) const {
        const Mat y = dense->at(t);
        return chain ? y.middleRows(1, d) : y.middleRows(d, d);
    }
    /// The differentiated columns fed to the orthonormalization: for the
    /// chain system this is row d of the state (the d-th derivative).
    Mat l_of_mu(const FlowCache& flow, double t) const {
        const Mat y = dense->at(t);
        if (chain) return y.row(d);
        const Mat mu_t = y.topRows(d);
        const Mat dmu_t = y.middleRows(d, d);
        return flow.f(t).inverse() * flow.g_inv(t) *
               (dmu_t - flow.model().alpha(t) * mu_t);
    }
};

SideSolution solve_side(const FlowCache& flow, const CompanionSystem& sys, double a, double b,
                        const Mat& ua, const Mat& ub, int steps) {
    const int d = flow.dim();
    const int rows = 2 * d;
    // Two basis trajectories: [ua; 0] and [0; I]; combine to meet u(b) = ub.
    Mat y0 = Mat::Zero(rows, 2 * d);
    y0.block(0, 0, d, d) = ua;
    y0.block(d, d, d, d) = Mat::Identity(d, d);
    DenseLinearFlow both(sys.matrix, y0, a, b, steps);
    const Mat yb = both.at(b);
    const Mat a0 = yb.block(0, 0, d, d);  // u(b) from the [ua; 0] part
    const Mat a1 = yb.block(0, d, d, d);  // response to unit derivative block
    Eigen::PartialPivLU<Mat> lu(a1);
    const Mat v = lu.solve(ub - a0);
    if (!v.allFinite()) throw DegeneracyError("singular shooting matrix in mu BVP");

    Mat init = Mat::Zero(rows, d);
    init.topRows(d) = ua;
    init.middleRows(d, d) = v;
    SideSolution side;
    side.dense = std::make_shared<DenseLinearFlow>(sys.matrix, init, a, b, steps);
    side.chain = sys.chain;
    side.d = d;
    return side;
}

int side_steps(const FlowCache& flow, double a, double b) {
    return std::max(64, int(std::ceil((b - a) * flow.config().flow_steps)));
}

}  // namespace

MuBvpSolution solve_mu_bvp(std::shared_ptr<const FlowCache> flow, double l, double m, double r) {
    if (!(l < m && m < r)) throw RangeError("mu BVP needs l < m < r");
    const CompanionSystem sys = make_companion(*flow);
    const int d = flow->dim();
    const Mat zero = Mat::Zero(d, d), eye = Mat::Identity(d, d);
    auto left = solve_side(*flow, sys, l, m, zero, eye, side_steps(*flow, l, m));
    auto right = solve_side(*flow, sys, m, r, eye, zero, side_steps(*flow, m, r));
    MuBvpSolution out;
    out.mu_l = [left](double t) { return left.mu(t); };
    out.dmu_l = [left](double t) { return left.dmu(t); };
    out.mu_r = [right](double t) { return right.mu(t); };
    out.dmu_r = [right](double t) { return right.dmu(t); };
    return out;
}

BvpElement basis_via_bvp(std::shared_ptr<const FlowCache> flow, const SupportTree& tree, int n,
                         int k) {
    const int d = flow->dim();
    const CompanionSystem sys = make_companion(*flow);
    const Mat zero = Mat::Zero(d, d), eye = Mat::Identity(d, d);

    double l, m, r;
    std::shared_ptr<SideSolution> left, right;
    if (n == 0) {
        // Root element: one-sided problem pinned to 0 at t=0 and I at t=1.
        l = 0.0;
        m = 1.0;
        r = 1.0;
        left = std::make_shared<SideSolution>(
            solve_side(*flow, sys, l, m, zero, eye, side_steps(*flow, l, m)));
    } else {
        const SupportTree::Node nd = tree.node(n, k);
        l = nd.l;
        m = nd.m;
        r = nd.r;
        left = std::make_shared<SideSolution>(
            solve_side(*flow, sys, l, m, zero, eye, side_steps(*flow, l, m)));
        right = std::make_shared<SideSolution>(
            solve_side(*flow, sys, m, r, eye, zero, side_steps(*flow, m, r)));
    }

    // Sample sqrt(weight)-scaled columns of L[mu] on both halves, then
    // orthonormalize in reverse column order (modified Gram-Schmidt with a
    // reorthogonalization pass). Reverse order keeps the mixing matrix
    // lower triangular, matching the Cholesky convention after sign fixes.
    GaussLegendre gl(std::max(16, flow->config().quadrature_order));
    const int rows_per_node = left->l_of_mu(*flow, 0.5 * (l + m)).rows();
    std::vector<std::pair<double, double>> halves{{l, m}};
    if (right) halves.push_back({m, r});
    const int total_rows = int(halves.size()) * int(gl.nodes.size()) * rows_per_node;
    Mat q(total_rows, d);
    int row = 0;
    for (std::size_t h = 0; h < halves.size(); ++h) {
        const auto& side = h == 0 ? *left : *right;
        const double c = 0.5 * (halves[h].first + halves[h].second);
        const double hw = 0.5 * (halves[h].second - halves[h].first);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double w = std::sqrt(gl.weights[i] * hw);
            q.block(row, 0, rows_per_node, d) = w * side.l_of_mu(*flow, c + hw * gl.nodes[i]);
            row += rows_per_node;
        }
    }

    Mat mixing = Mat::Identity(d, d);  // column j of psi = mu * mixing col j
    Mat e = q;                         // orthonormalized samples
    std::vector<double> norms(d, 0.0);
    for (int j = d - 1; j >= 0; --j) {
        for (int pass = 0; pass < 2; ++pass)
            for (int i = d - 1; i > j; --i) {
                const double c = e.col(i).dot(e.col(j));
                e.col(j) -= c * e.col(i);
                mixing.col(j) -= c * mixing.col(i);
            }
        norms[j] = e.col(j).norm();
        if (norms[j] < 1e-300)
            throw DegeneracyError("degenerate column in variational orthonormalization");
        e.col(j) /= norms[j];
        mixing.col(j) /= norms[j];
        if (mixing(j, j) < 0.0) {  // fix signs to the positive-diagonal convention
            e.col(j) = -e.col(j);
            mixing.col(j) = -mixing.col(j);
        }
    }

    BvpElement out;
    out.index = {n, k};
    out.l = l;
    out.m = m;
    out.r = r;
    out.sigma = mixing;  // psi(m) = mu(m) * mixing = mixing
    out.psi = [left, right, l, m, r, mixing, d](double t) -> Mat {
        if (t <= l || t > r || (t == r && right)) return Mat::Zero(d, d);
        if (t <= m) return left->mu(t) * mixing;
        return right->mu(t) * mixing;
    };
    return out;
}

}  // namespace gms
