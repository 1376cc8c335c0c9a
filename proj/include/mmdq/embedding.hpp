#pragma once

#include <cstdint>

#include "mmdq/kernel.hpp"
#include "mmdq/types.hpp"

namespace mmdq {

/// The target measure pi = sum_l pi_l delta_{x_l}.
class EmpiricalTarget {
public:
    /// Uniform weights 1/N.
    explicit EmpiricalTarget(Points samples);
    /// Weights must be nonnegative and sum to 1 within 1e-12.
    EmpiricalTarget(Points samples, Vector weights);

    Index size() const noexcept { return samples_.rows(); }
    Index dim() const noexcept { return samples_.cols(); }
    const Points& samples() const noexcept { return samples_; }
    const Vector& weights() const noexcept { return weights_; }
    bool uniform() const noexcept { return uniform_; }

    /// Per-coordinate bounding box of the samples.
    Point lower() const;
    Point upper() const;

private:
    void validate() const;

    Points samples_;
    Vector weights_;
    bool uniform_ = true;
};

/// mu = sum_i w_i delta_{y_i}. Weights are unconstrained reals.
struct WeightedQuantization {
    Points positions;
    Vector weights;

    void validate(Index dim) const;
};

/// C_pi = double integral of kappa against pi x pi, computed once per (target, kernel).
struct MomentCache {
    double c_pi = 0.0;
    /// 0 for the exact O(N^2) sum, otherwise the number of Monte Carlo pairs.
    long pairs = 0;

    static MomentCache exact(const EmpiricalTarget& target, const KernelSpec& spec);
    /// Unbiased estimate from `pairs` independent draws (I, J) ~ pi x pi.
    /// Standard error is at most diagonal() / sqrt(pairs).
    static MomentCache subsampled(const EmpiricalTarget& target, const KernelSpec& spec, long pairs,
                                  std::uint64_t seed);
};

/// Kernelized moments of pi at each row of Y, gathered in one pass over the samples.
///   v0(y)    = sum_l pi_l kappa(x_l, y)
///   v1(y)    = sum_l pi_l x_l kappa(x_l, y)
///   vbar0(y) = sum_l pi_l kbar(x_l, y)
///   vbar1(y) = sum_l pi_l x_l kbar(x_l, y)
struct Moments {
    Vector v0;
    Points v1;
    Vector vbar0;
    Points vbar1;

    /// grad v0(y_i) = vbar1(y_i) - y_i vbar0(y_i), one row per particle.
    Points grad_v0(const Points& positions) const;
};

Moments kernel_moments(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions);

double v0(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y);
Point v1(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y);
double vbar0(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y);
Point vbar1(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y);
Point grad_v0(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y);

Matrix kernel_matrix(const KernelSpec& spec, const Points& positions);
Matrix kbar_matrix(const KernelSpec& spec, const Points& positions);

/// w_hat(Y) solving K(Y) w = v0(Y). Throws SingularKernelMatrix.
Vector optimal_weights(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions);
Vector optimal_weights(const KernelSpec& spec, const Points& positions, const Vector& v0_at_positions);

/// sqrt(max(0, C_pi - 2 <w, v0(Y)> + w^T K(Y) w)).
double mmd(const EmpiricalTarget& target, const KernelSpec& spec, const WeightedQuantization& quantization,
           const MomentCache& cache);
double mmd_from_parts(double c_pi, const Vector& weights, const Vector& v0_at_positions, const Matrix& gram);

/// F_M(Y) = inf_w (1/2) MMD^2 = (1/2)(C_pi - <w_hat, v0(Y)>), floored at 0.
double fm(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
          const MomentCache& cache);

/// grad F_M(Y) = W (Kbar W Y - vhat1), W = diag(w_hat(Y)).
Points grad_fm(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
               const MomentCache& cache);

/// Row i: grad v0(y_i) + y_i sum_m w_m kbar(y_m, y_i). The stationarity and
/// gradient identities hold for w = w_hat(Y); other w are accepted as-is.
Points vhat1(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions, const Vector& weights);
Points vhat1_from_parts(const Points& positions, const Points& grad_v0_rows, const Matrix& kbar,
                        const Vector& weights);

}  // namespace mmdq
