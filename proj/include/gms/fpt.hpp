#pragma once

#include "gms/transforms.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>

namespace gms {

/// First-passage query against a level boundary (1-D) or a half-space
/// {x : direction . x >= level} (multi-D, treated by projection onto the
/// boundary normal with the projected marginal bridge statistics).
struct FptQuery {
    double level = 1.0;
    std::function<double(double)> level_fn;  ///< optional time-dependent boundary
    Vec direction;                           ///< empty for 1-D models
    int coarse_depth = 4;
    int max_depth = 12;
    double p_low = 1e-4;
    double p_high = 1.0 - 1e-4;
    std::int64_t paths = 1;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct FptRecord {
    std::int64_t path_id = 0;
    bool crossed = false;
    double tau_lo = 0.0;
    double tau_hi = 0.0;
};

struct FptStats {
    std::int64_t refined_nodes = 0;   ///< midpoint draws beyond the coarse grid
    std::int64_t full_tree_nodes = 0; ///< draws a full refinement would make
};

/// Probability that the bridge from (l, x_l) to (r, x_r) exceeds the
/// boundary inside (l, r), boundary values frozen at the endpoints.
/// Exact for the Wiener process via the time change y = x/g, eta = h(t);
/// for other models the boundary is assumed slowly varying in bridge
/// coordinates. Returns 1 when an endpoint already touches the boundary.
double bridge_crossing_probability(const FlowCache& flow, double x_l, double x_r, double l,
                                   double r, double level_l, double level_r);

std::vector<FptRecord> first_passage(const SchauderBasis& basis, const FptQuery& query,
                                     FptStats* stats = nullptr);

}  // namespace gms
