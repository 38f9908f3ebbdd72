#pragma once

#include "gms/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gms {

enum class Specialization {
    generic,
    wiener_1d,
    ou_constant_1d,
    rotation,
    integrated_wiener,
};

std::string to_string(Specialization s);
Specialization specialization_from_string(const std::string& name);

/// A Gauss-Markov process dX = alpha(t) X dt + gamma_root(t) dW on [0,1],
/// started at 0. Closed-form specializations keep their defining parameters
/// so that downstream evaluators can take exact fast paths.
struct ProcessModel {
    int d = 1;  ///< state dimension
    int m = 1;  ///< noise dimension
    Specialization specialization = Specialization::generic;

    std::function<Mat(double)> alpha;       ///< [0,1] -> R^{d x d}
    std::function<Mat(double)> gamma_root;  ///< [0,1] -> R^{d x m}

    /// Analytic derivatives, when the model has them; required by the
    /// Euler-Lagrange route (interp::solve_mu_bvp).
    std::function<Mat(double)> alpha_prime;
    std::function<Mat(double)> gamma_prime;  ///< derivative of Gamma = S S^T

    /// Interior kinks of the coefficients (tabulated models); integrators
    /// split their panels here to keep their order.
    std::vector<double> breakpoints;

    // Closed-form parameters (valid per specialization tag).
    double ou_alpha = 0.0;
    double ou_gamma = 1.0;
    double rot_sigma2 = 1.0;
    Mat rot_alpha;  ///< constant antisymmetric drift

    Mat gamma(double t) const {
        const Mat s = gamma_root(t);
        return s * s.transpose();
    }
    bool has_derivatives() const { return bool(alpha_prime) && bool(gamma_prime); }
};

ProcessModel make_wiener_1d();
ProcessModel make_ou_1d(double alpha, double gamma);
ProcessModel make_rotation(const Mat& alpha_antisym, double sigma2);
/// (d-1)-fold integrated Wiener process as a d-dimensional Gauss-Markov model.
ProcessModel make_integrated_wiener(int d);
ProcessModel make_generic(int d, int m,
                          std::function<Mat(double)> alpha,
                          std::function<Mat(double)> gamma_root,
                          std::function<Mat(double)> alpha_prime = nullptr,
                          std::function<Mat(double)> gamma_prime = nullptr);

/// Generic model from tabulated samples, interpolated piecewise-linearly.
ProcessModel make_tabulated(int d, int m,
                            std::vector<double> times,
                            std::vector<Mat> alpha_values,
                            std::vector<Mat> gamma_root_values);

}  // namespace gms
