#pragma once

#include "gms/types.hpp"

#include <array>
#include <functional>
#include <vector>

namespace gms {

/// Gauss-Legendre rule on [-1,1]; nodes/weights computed once per order
/// by Newton iteration on the Legendre recurrence.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int order);

    /// Integrate a matrix-valued function over [a,b].
    template <class F>
    Mat integrate(const F& fn, double a, double b) const {
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        Mat acc = weights[0] * hw * fn(c + hw * nodes[0]);
        for (std::size_t i = 1; i < nodes.size(); ++i)
            acc += weights[i] * hw * fn(c + hw * nodes[i]);
        return acc;
    }

    template <class F>
    double integrate_scalar(const F& fn, double a, double b) const {
        double acc = 0.0;
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * hw * fn(c + hw * nodes[i]);
        return acc;
    }
};

/// Classical RK4 for the matrix ODE Y' = rhs(t, Y), fixed step count.
template <class Rhs>
Mat rk4_integrate(const Rhs& rhs, Mat y, double t0, double t1, int steps) {
    if (steps < 1) steps = 1;
    const double h = (t1 - t0) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + i * h;
        const Mat k1 = rhs(t, y);
        const Mat k2 = rhs(t + 0.5 * h, Mat(y + 0.5 * h * k1));
        const Mat k3 = rhs(t + 0.5 * h, Mat(y + 0.5 * h * k2));
        const Mat k4 = rhs(t + h, Mat(y + h * k3));
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

}  // namespace gms
