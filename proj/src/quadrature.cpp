#include "gms/quadrature.hpp"

#include <cmath>

namespace gms {

GaussLegendre::GaussLegendre(int order) {
    if (order < 1) throw RangeError("Gauss-Legendre order must be >= 1");
    nodes.resize(order);
    weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace gms
