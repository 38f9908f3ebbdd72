#include "gms/model.hpp"

#include <algorithm>
#include <cmath>

namespace gms {

std::string to_string(Specialization s) {
    switch (s) {
        case Specialization::generic: return "generic";
        case Specialization::wiener_1d: return "wiener_1d";
        case Specialization::ou_constant_1d: return "ou_constant_1d";
        case Specialization::rotation: return "rotation";
        case Specialization::integrated_wiener: return "integrated_wiener";
    }
    return "generic";
}

Specialization specialization_from_string(const std::string& name) {
    if (name == "generic") return Specialization::generic;
    if (name == "wiener_1d") return Specialization::wiener_1d;
    if (name == "ou_constant_1d") return Specialization::ou_constant_1d;
    if (name == "rotation") return Specialization::rotation;
    if (name == "integrated_wiener") return Specialization::integrated_wiener;
    throw InputError("unknown specialization: " + name);
}

ProcessModel make_wiener_1d() {
    ProcessModel mdl;
    mdl.d = mdl.m = 1;
    mdl.specialization = Specialization::wiener_1d;
    mdl.alpha = [](double) { return Mat::Zero(1, 1); };
    mdl.gamma_root = [](double) { return Mat::Ones(1, 1); };
    mdl.alpha_prime = [](double) { return Mat::Zero(1, 1); };
    mdl.gamma_prime = [](double) { return Mat::Zero(1, 1); };
    return mdl;
}

ProcessModel make_ou_1d(double alpha, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(alpha))
        throw ModelError("ou_constant_1d requires finite alpha and Gamma > 0");
    ProcessModel mdl;
    mdl.d = mdl.m = 1;
    mdl.specialization = Specialization::ou_constant_1d;
    mdl.ou_alpha = alpha;
    mdl.ou_gamma = gamma;
    const double root = std::sqrt(gamma);
    mdl.alpha = [alpha](double) { return Mat::Constant(1, 1, alpha); };
    mdl.gamma_root = [root](double) { return Mat::Constant(1, 1, root); };
    mdl.alpha_prime = [](double) { return Mat::Zero(1, 1); };
    mdl.gamma_prime = [](double) { return Mat::Zero(1, 1); };
    return mdl;
}

ProcessModel make_rotation(const Mat& alpha_antisym, double sigma2) {
    const int d = int(alpha_antisym.rows());
    if (alpha_antisym.cols() != d) throw ModelError("rotation drift must be square");
    if ((alpha_antisym + alpha_antisym.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ModelError("rotation drift must be antisymmetric");
    if (!(sigma2 > 0.0)) throw ModelError("rotation requires sigma^2 > 0");
    ProcessModel mdl;
    mdl.d = mdl.m = d;
    mdl.specialization = Specialization::rotation;
    mdl.rot_alpha = alpha_antisym;
    mdl.rot_sigma2 = sigma2;
    const Mat a = alpha_antisym;
    const double root = std::sqrt(sigma2);
    mdl.alpha = [a](double) { return a; };
    mdl.gamma_root = [d, root](double) { return Mat(root * Mat::Identity(d, d)); };
    mdl.alpha_prime = [d](double) { return Mat(Mat::Zero(d, d)); };
    mdl.gamma_prime = [d](double) { return Mat(Mat::Zero(d, d)); };
    return mdl;
}

ProcessModel make_integrated_wiener(int d) {
    if (d < 2) throw ModelError("integrated_wiener requires d >= 2");
    ProcessModel mdl;
    mdl.d = d;
    mdl.m = 1;
    mdl.specialization = Specialization::integrated_wiener;
    mdl.alpha = [d](double) {
        Mat a = Mat::Zero(d, d);
        for (int i = 0; i + 1 < d; ++i) a(i, i + 1) = 1.0;
        return a;
    };
    mdl.gamma_root = [d](double) {
        Mat s = Mat::Zero(d, 1);
        s(d - 1, 0) = 1.0;
        return s;
    };
    mdl.alpha_prime = [d](double) { return Mat(Mat::Zero(d, d)); };
    mdl.gamma_prime = [d](double) { return Mat(Mat::Zero(d, d)); };
    return mdl;
}

ProcessModel make_generic(int d, int m,
                          std::function<Mat(double)> alpha,
                          std::function<Mat(double)> gamma_root,
                          std::function<Mat(double)> alpha_prime,
                          std::function<Mat(double)> gamma_prime) {
    if (d < 1 || m < 1) throw ModelError("dimensions must be >= 1");
    ProcessModel mdl;
    mdl.d = d;
    mdl.m = m;
    mdl.specialization = Specialization::generic;
    mdl.alpha = std::move(alpha);
    mdl.gamma_root = std::move(gamma_root);
    mdl.alpha_prime = std::move(alpha_prime);
    mdl.gamma_prime = std::move(gamma_prime);
    return mdl;
}

namespace {

Mat interp_table(const std::vector<double>& times, const std::vector<Mat>& values, double t) {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = std::size_t(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
}

}  // namespace

ProcessModel make_tabulated(int d, int m,
                            std::vector<double> times,
                            std::vector<Mat> alpha_values,
                            std::vector<Mat> gamma_root_values) {
    if (times.size() < 2 || alpha_values.size() != times.size() ||
        gamma_root_values.size() != times.size())
        throw InputError("tabulated model needs >= 2 samples with matching lengths");
    if (!std::is_sorted(times.begin(), times.end()))
        throw InputError("tabulated sample times must be sorted");
    for (const Mat& a : alpha_values)
        if (a.rows() != d || a.cols() != d || !a.allFinite())
            throw ModelError("tabulated alpha sample has wrong shape or non-finite entries");
    for (const Mat& s : gamma_root_values)
        if (s.rows() != d || s.cols() != m || !s.allFinite())
            throw ModelError("tabulated gamma_root sample has wrong shape or non-finite entries");
    ProcessModel mdl;
    mdl.d = d;
    mdl.m = m;
    mdl.specialization = Specialization::generic;
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
        if (times[i] > 0.0 && times[i] < 1.0) mdl.breakpoints.push_back(times[i]);
    mdl.alpha = [times, alpha_values](double t) { return interp_table(times, alpha_values, t); };
    mdl.gamma_root = [times, gamma_root_values](double t) {
        return interp_table(times, gamma_root_values, t);
    };
    return mdl;
}

}  // namespace gms
