#pragma once

#include "gms/transforms.hpp"

#include <memory>

namespace gms {

/// Two one-dimensional models sharing gamma_root, with bases built on the
/// same partition. Pairs whose diffusions differ by a C^1 ratio are
/// reduced first: the second process is rescaled by gamma(t) =
/// gamma_root_a / gamma_root_b, which shifts its drift by gamma'/gamma.
struct ModelPair {
    std::shared_ptr<const SchauderBasis> basis_a;  ///< the sampling (numerator) model
    std::shared_ptr<const SchauderBasis> basis_b;  ///< the target model, after reduction
    bool reduced = false;
    std::function<double(double)> gamma_ratio;  ///< identity scaling if !reduced
};

ModelPair make_model_pair(const ProcessModel& model_a, const ProcessModel& model_b,
                          int max_level, FlowConfig cfg = {});

/// Triangular change-of-basis matrices between the two coefficient
/// systems, over levels 0..N-1 in recursive dyadic order.
struct LiftMatrices {
    int N = 0;
    Mat G;                         ///< coefficients of a -> coefficients of b
    Mat H;                         ///< the reverse lift, assembled independently
    Vec nu;                        ///< diagonal (eigenvalues), recursive order
    double det_g = 1.0;            ///< J_N, the product of nu
    double spectral_radius = 1.0;  ///< sup |nu| (the measured bound)
};

LiftMatrices lift_matrix(const ModelPair& pair, int N);

/// exp(1/2 int_0^1 (alpha - beta) dt), the limit of det G_N. Models are
/// accepted with merely continuous drifts, but the convergence of the
/// finite determinants to this value needs Holder-regular drifts.
double determinant_limit(const ModelPair& pair);
/// J_N for N = 1..n_max (diagonal products; cheap convergence report).
std::vector<double> finite_determinants(const ModelPair& pair, int n_max);

struct RnWeight {
    double log_weight = 0.0;
    double weight = 1.0;
};

/// Finite-dimensional Radon-Nikodym weight dP_b / dP_a evaluated on the
/// coefficients of a path drawn under model a:
///   J_N exp(-1/2 xi^T (S_N - I) xi),  S_N = G_N^T G_N.
/// Computed in log space; both forms are returned.
RnWeight rn_derivative(const ModelPair& pair, const LiftMatrices& lift,
                       const CoefficientField& xi);

struct TraceDefect {
    double finite_trace = 0.0;  ///< tr(S_N - I)
    double limit_trace = 0.0;   ///< int (a-b) + int (h_a/f_a^2)(a-b)^2
};

TraceDefect trace_defect(const ModelPair& pair, int N);

/// S_N entry by direct quadrature of the kernel
/// int (phi_a + ((a-b)/sqrt(Gamma)) psi_a)_{n,k} (same)_{p,q} dt;
/// an independent cross-check of G_N^T G_N.
double s_entry_by_quadrature(const ModelPair& pair, NodeIndex a, NodeIndex b);

}  // namespace gms
