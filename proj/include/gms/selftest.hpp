#pragma once

#include "gms/basis.hpp"

#include <string>
#include <vector>

namespace gms {

struct CheckResult {
    std::string name;
    double value = 0.0;  ///< measured defect
    double bound = 0.0;  ///< tolerance
    bool pass = false;
};

/// Analytic-identity suite for one model: flow chain rule, h additivity
/// and conjugation, covariance symmetry, duality Kronecker, the Cholesky
/// factorization of the grid covariance, and an exact round trip.
std::vector<CheckResult> selftest(const ProcessModel& model, int depth, FlowConfig cfg = {});

}  // namespace gms
