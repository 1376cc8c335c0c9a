#pragma once

#include <string>

#include "mmdq/types.hpp"

namespace mmdq {

/// Cholesky factorization of a symmetric kernel matrix with additive jitter.
///
/// The jitter starts at 1e-12 * diag_scale and grows tenfold while the
/// factorization fails or its reciprocal condition estimate is below 1e-14.
/// Past 1e-6 * diag_scale the matrix is declared singular.
///
/// solve() applies one step of iterative refinement against the unshifted
/// matrix, so on well-conditioned systems the jitter bias drops to
/// O((jitter / lambda_min)^2); along near-null directions the correction is at
/// most a factor of two.
class JitteredCholesky {
public:
    /// `configuration` is only used to populate the SingularKernelMatrix error.
    JitteredCholesky(const Matrix& a, double diag_scale, const Points& configuration,
                     const std::string& label = "K(Y)");

    Vector solve(const Vector& b) const;
    Matrix solve(const Matrix& b) const;

    double jitter() const noexcept { return jitter_; }

private:
    Matrix a_;
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

inline constexpr double kJitterStart = 1e-12;
inline constexpr double kJitterMax = 1e-6;
inline constexpr double kMinReciprocalCondition = 1e-14;

}  // namespace mmdq
