#pragma once

#include "gms/flow.hpp"
#include "gms/partition.hpp"
#include "gms/types.hpp"

#include <memory>
#include <vector>

namespace gms {

/// Conditional moments of the process pinned at t_x and t_z: the value at
/// t in [t_x, t_z] is Gaussian with covariance `sigma` and mean
/// mu_l x + mu_r z.
struct BridgeMoments {
    Mat sigma;
    Mat mu_l;
    Mat mu_r;
};

BridgeMoments bridge_moments(const FlowCache& flow, double t, double t_x, double t_z);

/// One multi-resolution element: the constant matrices L, R, M = L + R,
/// the midpoint conditional covariance Sigma with its Cholesky root, and
/// the bridge interpolation weights at the midpoint.
struct BasisElement {
    NodeIndex index;
    double l, m, r;
    Mat L, R, M;
    Mat Sigma;
    Mat sigma_root;  ///< lower triangular, positive diagonal
    Mat mu_l_mid;    ///< weight of x(l) in E[x(m) | x(l), x(r)]
    Mat mu_r_mid;    ///< weight of x(r)
};

/// Three-point dual functional: applying it to path values at {l, m, r}
/// extracts the (n,k) coefficient. The root uses the single point r = 1.
struct DualFunctional {
    NodeIndex index;
    double l, m, r;
    Mat w_m;  ///< M^T g(m)^{-1}
    Mat w_l;  ///< L^T g(l)^{-1} (entering with a minus sign)
    Mat w_r;  ///< R^T g(r)^{-1} (minus sign; the root keeps only this point)
    bool root = false;

    Vec apply(const Vec& x_l, const Vec& x_m, const Vec& x_r) const {
        if (root) return w_r * x_r;
        return w_m * x_m - w_l * x_l - w_r * x_r;
    }
    Mat apply(const Mat& x_l, const Mat& x_m, const Mat& x_r) const {
        if (root) return w_r * x_r;
        return w_m * x_m - w_l * x_l - w_r * x_r;
    }
};

/// All elements up to a maximum level, built from one FlowCache + tree.
/// Elements are independent given the flow and may be built in parallel;
/// the finished basis is immutable.
class SchauderBasis {
public:
    SchauderBasis(std::shared_ptr<const FlowCache> flow, SupportTree tree, int max_level,
                  int threads = 0);

    const FlowCache& flow() const { return *flow_; }
    const SupportTree& tree() const { return tree_; }
    int max_level() const { return max_level_; }
    int dim() const { return flow_->dim(); }
    int noise_dim() const { return flow_->noise_dim(); }

    const BasisElement& element(int n, int k) const;
    const DualFunctional& dual(int n, int k) const;

    /// psi_{n,k}(t): d x d, zero outside the support, sigma_root at m.
    Mat eval_psi(const BasisElement& el, double t) const;
    /// phi_{n,k}(t): m x d, piecewise f(t)^T L / -f(t)^T R with a jump at m.
    Mat eval_phi(const BasisElement& el, double t) const;

    /// Indices (0,0),(1,0),(2,0),(2,1),... up to level `max_level` inclusive
    /// (the recursive dyadic order used by every matrix assembly).
    std::vector<NodeIndex> ordered_indices(int max_level) const;

private:
    BasisElement build_element(int n, int k) const;
    DualFunctional build_dual(const BasisElement& el) const;

    std::shared_ptr<const FlowCache> flow_;
    SupportTree tree_;
    int max_level_;
    std::vector<std::vector<BasisElement>> elements_;  // [n][k]
    std::vector<std::vector<DualFunctional>> duals_;
};

}  // namespace gms
