#pragma once

#include "gms/types.hpp"

#include <functional>
#include <vector>

namespace gms {

enum class PartitionKind { dyadic, custom };

/// Nested binary tree of supports S_{n,k} = [l_{n,k}, r_{n,k}] with
/// midpoints m_{n,k}, for levels n = 1..depth, 0 <= k < 2^(n-1).
/// The root element (0,0) covers [0,1]. Dyadic endpoints are stored
/// exactly (binary floating point represents them without rounding).
class SupportTree {
public:
    struct Node {
        double l, m, r;
    };

    /// midpoint_rule(l, r) -> m; must satisfy the rho balance bound.
    static SupportTree build(int depth, PartitionKind kind = PartitionKind::dyadic,
                             std::function<double(double, double)> midpoint_rule = nullptr,
                             double rho = 0.75);

    int depth() const { return depth_; }
    PartitionKind kind() const { return kind_; }
    double rho() const { return rho_; }

    /// Node of level n >= 1; (0,0) is accepted and reports l=0, m=1, r=1
    /// (the root element peaks at the right endpoint).
    Node node(int n, int k) const;

    /// Sorted endpoint set D_N (|D_N| = 2^(N-1)+1 for dyadic trees).
    std::vector<double> endpoints(int N) const;

    /// Number of level-n supports.
    static std::int64_t level_size(int n) { return n == 0 ? 1 : (std::int64_t(1) << (n - 1)); }

private:
    int depth_ = 0;
    PartitionKind kind_ = PartitionKind::dyadic;
    double rho_ = 0.75;
    std::vector<std::vector<Node>> levels_;  // levels_[n-1] has 2^(n-1) nodes
};

}  // namespace gms
