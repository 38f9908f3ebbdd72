#pragma once

#include "gms/model.hpp"
#include "gms/quadrature.hpp"
#include "gms/types.hpp"

#include <memory>
#include <vector>

namespace gms {

struct FlowConfig {
    int flow_steps = 256;       ///< RK4 sub-steps per unit time
    int quadrature_order = 16;  ///< Gauss-Legendre nodes per panel / support
    double cond_bound = 1e12;   ///< condition guard for g(t) inversion
    bool force_generic = false; ///< ignore closed forms (consistency checks)
};

/// Immutable evaluator bundle for one model: the flow F(s,t) of u' = alpha u,
/// g(t) = F(0,t), f(t) = F(t,0) gamma_root(t), and the accumulated noise
/// kernel h. Generic models integrate with fixed-step RK4 and memoize g and
/// the cumulative h at a uniform anchor grid; tagged models use closed forms.
class FlowCache {
public:
    FlowCache(ProcessModel model, FlowConfig cfg = {});

    const ProcessModel& model() const { return model_; }
    const FlowConfig& config() const { return cfg_; }
    int dim() const { return model_.d; }
    int noise_dim() const { return model_.m; }

    /// F(s,t): solution map of the linear ODE from time s to time t.
    Mat flow(double s, double t) const;
    Mat g(double t) const;      ///< F(0,t)
    Mat g_inv(double t) const;  ///< F(t,0), with condition guard
    Mat f(double t) const;      ///< F(t,0) gamma_root(t), d x m

    /// h_0(s,t) = int_s^t f f^T dw, requires s <= t. Symmetrized output.
    Mat h0(double s, double t) const;
    /// h_u(s,t) = F(0,u) h_0(s,t) F(0,u)^T.
    Mat h_u(double u, double s, double t) const;
    /// Process covariance C(t,s) = g(t) h_0(0, t^s) g(s)^T.
    Mat covariance(double t, double s) const;

private:
    Mat generic_g(double t) const;
    Mat h0_local(double s, double t) const;  ///< quadrature split at kinks
    std::vector<double> split_points(double a, double b) const;
    Mat integrate_flow(Mat y, double a, double b) const;
    void check_finite(const Mat& a, double t) const;

    ProcessModel model_;
    FlowConfig cfg_;
    GaussLegendre gl_;
    std::vector<Mat> g_anchor_;  ///< g at i/flow_steps (generic models)
    std::vector<Mat> h_anchor_;  ///< cumulative h_0(0, i/flow_steps)
    bool closed_form_ = false;
};

}  // namespace gms
