#include "gms/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gms {

SupportTree SupportTree::build(int depth, PartitionKind kind,
                               std::function<double(double, double)> midpoint_rule,
                               double rho) {
    if (depth < 1) throw RangeError("partition depth must be >= 1");
    if (!(rho > 0.0 && rho < 1.0)) throw RangeError("rho must lie in (0,1)");
    SupportTree tree;
    tree.depth_ = depth;
    tree.kind_ = kind;
    tree.rho_ = rho;
    tree.levels_.resize(depth);

    auto midpoint = [&](double l, double r, int n, int k) {
        double m;
        if (kind == PartitionKind::dyadic || !midpoint_rule)
            m = std::ldexp(double(2 * k + 1), -n);  // exact dyadic
        else
            m = midpoint_rule(l, r);
        if (!(l < m && m < r))
            throw PartitionError("midpoint outside (l, r) at node (" + std::to_string(n) + "," +
                                 std::to_string(k) + ")");
        if (std::max(r - m, m - l) >= rho * (r - l))
            throw PartitionError("balance bound rho violated at node (" + std::to_string(n) + "," +
                                 std::to_string(k) + ")");
        return m;
    };

    tree.levels_[0] = {Node{0.0, midpoint(0.0, 1.0, 1, 0), 1.0}};
    for (int n = 2; n <= depth; ++n) {
        const auto& parent = tree.levels_[n - 2];
        auto& cur = tree.levels_[n - 1];
        cur.resize(parent.size() * 2);
        for (std::size_t k = 0; k < parent.size(); ++k) {
            const Node& p = parent[k];
            cur[2 * k] = Node{p.l, 0.0, p.m};
            cur[2 * k + 1] = Node{p.m, 0.0, p.r};
            cur[2 * k].m = midpoint(p.l, p.m, n, int(2 * k));
            cur[2 * k + 1].m = midpoint(p.m, p.r, n, int(2 * k + 1));
        }
    }
    return tree;
}

SupportTree::Node SupportTree::node(int n, int k) const {
    if (n == 0) {
        if (k != 0) throw RangeError("root node is (0,0)");
        return Node{0.0, 1.0, 1.0};
    }
    if (n < 1 || n > depth_ || k < 0 || k >= int(level_size(n)))
        throw RangeError("node (" + std::to_string(n) + "," + std::to_string(k) +
                         ") outside tree of depth " + std::to_string(depth_));
    return levels_[n - 1][k];
}

std::vector<double> SupportTree::endpoints(int N) const {
    if (N < 1 || N > depth_)
        throw RangeError("endpoint level " + std::to_string(N) + " exceeds tree depth");
    std::vector<double> pts{0.0, 1.0};
    for (int n = 1; n < N; ++n)
        for (int k = 0; k < int(level_size(n)); ++k) pts.push_back(levels_[n - 1][k].m);
    std::sort(pts.begin(), pts.end());
    return pts;
}

}  // namespace gms
