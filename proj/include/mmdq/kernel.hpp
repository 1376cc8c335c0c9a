#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mmdq/types.hpp"

namespace mmdq {

enum class KernelFamily { SquaredExponential, InverseMultiquadric, Matern32 };

/// Radial kernel kappa(x, y) = phi(|x - y|) together with its companion kernel
/// kbar, which satisfies grad_y kappa(x, y) = (x - y) * kbar(x, y).
///
/// Conventions (s = bandwidth, r = |x - y|):
///   se        kappa = exp(-r^2 / s^2)                 kbar = (2 / s^2) kappa
///   imq       kappa = (c^2 + r^2 / s^2)^(-1/2)        kbar = (1 / s^2)(c^2 + r^2 / s^2)^(-3/2)
///   matern32  kappa = (1 + sqrt3 r / s) e^(-sqrt3 r / s)   kbar = (3 / s^2) e^(-sqrt3 r / s)
///
/// Note the squared-exponential has no factor 1/2 in the exponent; a bandwidth
/// s here corresponds to s / sqrt(2) in the exp(-r^2 / (2 s^2)) convention.
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    double bandwidth = 1.0;
    double imq_offset = 1.0;

    static KernelSpec squared_exponential(double bandwidth);
    static KernelSpec inverse_multiquadric(double bandwidth, double offset);
    static KernelSpec matern32(double bandwidth);

    /// Throws InputError unless bandwidth > 0 (and imq_offset > 0 for IMQ).
    void validate() const;

    /// kappa(x, x), identical for every x.
    double diagonal() const;
    /// kbar(x, x).
    double companion_diagonal() const;

    /// lambda with kbar = lambda * kappa, when such a constant exists (SE only).
    std::optional<double> companion_ratio_constant() const;

    // Radial forms, taking the squared distance.
    double eval_sq(double r2) const;
    double log_eval_sq(double r2) const;
    double companion_sq(double r2) const;
    /// kbar / kappa as a function of r^2; finite for every family.
    double companion_ratio_sq(double r2) const;
    /// eval_sq and companion_sq applied elementwise to a batch of squared distances.
    void eval_batch(const Eigen::ArrayXd& r2, Eigen::ArrayXd& k, Eigen::ArrayXd& kbar) const;
};

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Squared Euclidean distance accumulated in a single pass, so the result is
/// bitwise symmetric in its arguments.
double squared_distance(PointRef x, PointRef y);

double eval(const KernelSpec& spec, PointRef x, PointRef y);
/// Gradient of kappa(x, .) at y.
Point grad2(const KernelSpec& spec, PointRef x, PointRef y);
double companion(const KernelSpec& spec, PointRef x, PointRef y);

}  // namespace mmdq
