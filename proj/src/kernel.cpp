#include "mmdq/kernel.hpp"

#include <cmath>

#include "mmdq/errors.hpp"

namespace mmdq {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void check_same_dim(PointRef x, PointRef y) {
    if (x.size() != y.size()) {
        throw InputError("kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
    }
    if (x.size() == 0) {
        throw InputError("kernel: points must have dimension >= 1");
    }
}

}  // namespace

KernelSpec KernelSpec::squared_exponential(double bandwidth) {
    KernelSpec spec{KernelFamily::SquaredExponential, bandwidth, 1.0};
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::inverse_multiquadric(double bandwidth, double offset) {
    KernelSpec spec{KernelFamily::InverseMultiquadric, bandwidth, offset};
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::matern32(double bandwidth) {
    KernelSpec spec{KernelFamily::Matern32, bandwidth, 1.0};
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InputError("kernel: bandwidth must be a positive finite number");
    }
    if (family == KernelFamily::InverseMultiquadric && (!(imq_offset > 0.0) || !std::isfinite(imq_offset))) {
        throw InputError("kernel: imq_offset must be a positive finite number");
    }
}

double KernelSpec::diagonal() const { return eval_sq(0.0); }

double KernelSpec::companion_diagonal() const { return companion_sq(0.0); }

std::optional<double> KernelSpec::companion_ratio_constant() const {
    if (family == KernelFamily::SquaredExponential) {
        return 2.0 / (bandwidth * bandwidth);
    }
    return std::nullopt;
}

double KernelSpec::eval_sq(double r2) const {
    const double s2 = bandwidth * bandwidth;
    switch (family) {
        case KernelFamily::SquaredExponential:
            return std::exp(-r2 / s2);
        case KernelFamily::InverseMultiquadric:
            return 1.0 / std::sqrt(imq_offset * imq_offset + r2 / s2);
        case KernelFamily::Matern32: {
            const double a = kSqrt3 * std::sqrt(r2) / bandwidth;
            return (1.0 + a) * std::exp(-a);
        }
    }
    return 0.0;
}

void KernelSpec::eval_batch(const Eigen::ArrayXd& r2, Eigen::ArrayXd& k, Eigen::ArrayXd& kbar) const {
    const double s2 = bandwidth * bandwidth;
    switch (family) {
        case KernelFamily::SquaredExponential:
            k = (-r2 / s2).exp();
            kbar = (2.0 / s2) * k;
            return;
        case KernelFamily::InverseMultiquadric: {
            const Eigen::ArrayXd q = imq_offset * imq_offset + r2 / s2;
            k = q.rsqrt();
            kbar = k.cube() / s2;
            return;
        }
        case KernelFamily::Matern32: {
            const Eigen::ArrayXd a = kSqrt3 * r2.sqrt() / bandwidth;
            const Eigen::ArrayXd e = (-a).exp();
            k = (1.0 + a) * e;
            kbar = (3.0 / s2) * e;
            return;
        }
    }
}

double KernelSpec::log_eval_sq(double r2) const {
    const double s2 = bandwidth * bandwidth;
    switch (family) {
        case KernelFamily::SquaredExponential:
            return -r2 / s2;
        case KernelFamily::InverseMultiquadric:
            return -0.5 * std::log(imq_offset * imq_offset + r2 / s2);
        case KernelFamily::Matern32: {
            const double a = kSqrt3 * std::sqrt(r2) / bandwidth;
            return std::log1p(a) - a;
        }
    }
    return 0.0;
}

double KernelSpec::companion_sq(double r2) const {
    const double s2 = bandwidth * bandwidth;
    switch (family) {
        case KernelFamily::SquaredExponential:
            return (2.0 / s2) * std::exp(-r2 / s2);
        case KernelFamily::InverseMultiquadric: {
            const double q = imq_offset * imq_offset + r2 / s2;
            return 1.0 / (s2 * q * std::sqrt(q));
        }
        case KernelFamily::Matern32: {
            const double a = kSqrt3 * std::sqrt(r2) / bandwidth;
            return (3.0 / s2) * std::exp(-a);
        }
    }
    return 0.0;
}

double KernelSpec::companion_ratio_sq(double r2) const {
    const double s2 = bandwidth * bandwidth;
    switch (family) {
        case KernelFamily::SquaredExponential:
            return 2.0 / s2;
        case KernelFamily::InverseMultiquadric:
            return 1.0 / (s2 * (imq_offset * imq_offset + r2 / s2));
        case KernelFamily::Matern32: {
            const double a = kSqrt3 * std::sqrt(r2) / bandwidth;
            return (3.0 / s2) / (1.0 + a);
        }
    }
    return 0.0;
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponential:
            return "se";
        case KernelFamily::InverseMultiquadric:
            return "imq";
        case KernelFamily::Matern32:
            return "matern32";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "se" || name == "squared_exponential" || name == "gaussian") {
        return KernelFamily::SquaredExponential;
    }
    if (name == "imq" || name == "inverse_multiquadric") {
        return KernelFamily::InverseMultiquadric;
    }
    if (name == "matern32" || name == "matern") {
        return KernelFamily::Matern32;
    }
    throw InputError("unknown kernel family '" + std::string(name) + "' (expected se, imq or matern32)");
}

double squared_distance(PointRef x, PointRef y) {
    double r2 = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        r2 += diff * diff;
    }
    return r2;
}

double eval(const KernelSpec& spec, PointRef x, PointRef y) {
    check_same_dim(x, y);
    return spec.eval_sq(squared_distance(x, y));
}

Point grad2(const KernelSpec& spec, PointRef x, PointRef y) {
    check_same_dim(x, y);
    return (x - y) * spec.companion_sq(squared_distance(x, y));
}

double companion(const KernelSpec& spec, PointRef x, PointRef y) {
    check_same_dim(x, y);
    return spec.companion_sq(squared_distance(x, y));
}

}  // namespace mmdq
