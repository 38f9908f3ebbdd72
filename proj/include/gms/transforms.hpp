#pragma once

#include "gms/basis.hpp"
#include "gms/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace gms {

/// Coefficients xi_{n,k} in R^d for levels 0..depth (root included).
class CoefficientField {
public:
    CoefficientField() = default;
    CoefficientField(int dim, int depth);

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    Vec& at(int n, int k);
    const Vec& at(int n, int k) const;
    bool all_finite() const;

    /// Smallest delta such that |xi_{n,k}|_inf <= 2^(n delta / 2) for all
    /// levels n >= n0; values below 1 contribute nothing. A field of
    /// coefficients of a continuous-path expansion reports delta < 1.
    double admissibility_delta(int n0 = 1) const;

private:
    int dim_ = 0, depth_ = -1;
    std::vector<std::vector<Vec>> values_;
};

/// Dyadic-grid snapshot of a finite expansion. `xi` is the source of
/// truth; `values[i]` equals the partial sum at `times[i]` (the grid of
/// level depth+1 endpoints), with values[0] = 0.
struct SamplePath {
    int depth = 0;
    std::vector<double> times;
    std::vector<Vec> values;
    CoefficientField xi;
};

/// Grid carrying a path of depth N: endpoints of the level-(N+1) supports.
std::vector<double> grid_times(const SupportTree& tree, int depth);

/// Partial sum  sum_{n <= xi.depth} psi_{n,k}(t) xi_{n,k}; only the
/// ancestors of t contribute, so the work is O(depth).
Vec construct(const SchauderBasis& basis, const CoefficientField& xi, double t);

/// Inverse of construct on the grid: applies every three-point functional
/// to the given grid values (indexed like grid_times(tree, depth)).
CoefficientField coefficients(const SchauderBasis& basis, const std::vector<Vec>& grid_values,
                              int depth);
CoefficientField coefficients(const SchauderBasis& basis, const std::function<Vec(double)>& x,
                              int depth);

/// Block matrix [psi_{n,k}(t_{i,j})] over indices (0,0) and levels 1..N-1
/// in recursive dyadic order, with t_{0,0} = 1 and t_{i,j} = m_{i,j}.
/// Lower block-triangular with the sigma_root blocks on the diagonal, so
/// it is the Cholesky factor of the grid covariance.
Mat psi_matrix(const SchauderBasis& basis, int N);
/// Its inverse, assembled independently from the dual functionals.
Mat delta_matrix(const SchauderBasis& basis, int N);
/// Grid covariance [C(t_{i,j}, t_{k,l})] on the same points/order.
Mat grid_covariance(const SchauderBasis& basis, int N);

/// Draw a path of the given depth; deterministic in (seed, stream).
SamplePath sample_path(const SchauderBasis& basis, int depth, std::uint64_t seed,
                       std::uint64_t stream = 0);

/// Extend `path` by one level. Midpoints of the listed level-(depth+1)
/// nodes receive fresh conditional draws; unlisted midpoints keep their
/// conditional mean (coefficient zero). Existing grid values are
/// untouched. An empty target list returns the path unchanged.
SamplePath refine(const SchauderBasis& basis, const SamplePath& path,
                  const std::vector<int>& target_k, std::uint64_t seed,
                  std::uint64_t stream = 0);
SamplePath refine_all(const SchauderBasis& basis, const SamplePath& path, std::uint64_t seed,
                      std::uint64_t stream = 0);

/// Matrix-valued function of t with known kink/jump locations.
struct PiecewiseFn {
    std::function<Mat(double)> eval;
    std::vector<double> breakpoints;  ///< sorted, interior to [0,1]
};

/// K[u](t) = g(t) int_0^t f(s) u(s) ds, integrated piecewise between
/// breakpoints with the flow's quadrature rule.
PiecewiseFn apply_K(std::shared_ptr<const FlowCache> flow, PiecewiseFn u);

/// D[u](t) = f(t)^{-1} g(t)^{-1} (u'(t) - alpha(t) u(t)); requires m = d
/// and invertible f. `du` supplies the analytic derivative; otherwise
/// central differences with step 1e-6 are used.
PiecewiseFn apply_D(std::shared_ptr<const FlowCache> flow, PiecewiseFn u,
                    std::function<Mat(double)> du = nullptr);

}  // namespace gms
