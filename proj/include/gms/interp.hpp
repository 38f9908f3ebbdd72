#pragma once

#include "gms/transforms.hpp"

#include <functional>

namespace gms {

/// Data to interpolate on the level-(depth+1) endpoint grid; data[0] is
/// the value at t = 0 and must be zero (the processes start at zero).
struct InterpolationProblem {
    const SchauderBasis* basis = nullptr;
    int depth = 0;
    std::vector<Vec> data;
};

/// Finite expansion returned by the interpolation solve; evaluates by
/// partial sums, so it reproduces the data on the grid.
struct Interpolant {
    const SchauderBasis* basis = nullptr;
    CoefficientField xi;
    Vec operator()(double t) const { return construct(*basis, xi, t); }
};

/// int_0^1 |D[x]|^2 dt by per-panel quadrature between the breakpoints of
/// x (and the grid of `panels` uniform panels). Requires m = d.
double dirichlet_energy(std::shared_ptr<const FlowCache> flow, const PiecewiseFn& x,
                        std::function<Mat(double)> dx = nullptr, int panels = 64);

Interpolant optimal_interpolant(const InterpolationProblem& problem);

/// The two halves of the bridge-mean pair on [l,m] and [m,r], obtained by
/// shooting with the RK4 flow of the first-order companion system of the
/// Euler-Lagrange equation. Needs differentiable alpha/Gamma; Gamma must
/// be invertible except for the integrated-Wiener chain, which uses its
/// scalar high-order form of the same equation.
struct MuBvpSolution {
    std::function<Mat(double)> mu_l, mu_r;    ///< d x d, boundary values 0/I
    std::function<Mat(double)> dmu_l, dmu_r;  ///< time derivatives
};
MuBvpSolution solve_mu_bvp(std::shared_ptr<const FlowCache> flow, double l, double m, double r);

/// Element reconstructed through the variational route: BVP solve, apply
/// the differential operator, orthonormalize under the L2 inner product,
/// multiply back. Matches the direct construction up to quadrature error.
struct BvpElement {
    NodeIndex index;
    double l, m, r;
    Mat sigma;  ///< psi(m); lower triangular with positive diagonal
    std::function<Mat(double)> psi;
};
BvpElement basis_via_bvp(std::shared_ptr<const FlowCache> flow, const SupportTree& tree, int n,
                         int k);

}  // namespace gms
