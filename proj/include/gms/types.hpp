#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gms {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Index of a basis element / support node. Level 0 is the single root
/// element covering [0,1]; level n >= 1 has 2^(n-1) elements.
struct NodeIndex {
    int n = 0;
    int k = 0;
    friend bool operator==(const NodeIndex& a, const NodeIndex& b) {
        return a.n == b.n && a.k == b.k;
    }
    friend bool operator<(const NodeIndex& a, const NodeIndex& b) {
        return a.n != b.n ? a.n < b.n : a.k < b.k;
    }
};

/// Number of elements on levels 0..n inclusive (root counted once).
inline std::int64_t element_count(int max_level) {
    return std::int64_t(1) << max_level;  // 1 + 1 + 2 + ... + 2^(n-1)
}

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Model evaluation produced non-finite values or an invalid definition.
struct ModelError : Error {
    using Error::Error;
};

/// A partition node violates nesting or the balance bound.
struct PartitionError : Error {
    using Error::Error;
};

/// A kernel or conditional covariance is numerically singular.
struct DegeneracyError : Error {
    using Error::Error;
};

/// Argument outside the valid range (depth, level, node index, ...).
struct RangeError : Error {
    using Error::Error;
};

/// Malformed or incomplete user input (files, grids, CLI values).
struct InputError : Error {
    using Error::Error;
};

}  // namespace gms
