#include "mmdq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmdq/errors.hpp"

namespace mmdq {

namespace {

[[noreturn]] void throw_singular(const std::string& label, const Matrix& a, double last_jitter,
                                 const Points& configuration) {
    std::ostringstream msg;
    msg << "singular kernel matrix " << label << " (" << a.rows() << "x" << a.cols()
        << "), still ill-conditioned at jitter " << last_jitter;
    if (configuration.rows() > 0) {
        msg << "; configuration:";
        const Index shown = std::min<Index>(configuration.rows(), 8);
        for (Index i = 0; i < shown; ++i) {
            msg << " [";
            for (Index k = 0; k < configuration.cols(); ++k) {
                msg << (k ? "," : "") << configuration(i, k);
            }
            msg << "]";
        }
        if (shown < configuration.rows()) {
            msg << " ...";
        }
    }
    throw SingularKernelMatrix(msg.str(), configuration);
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace

JitteredCholesky::JitteredCholesky(const Matrix& a, double diag_scale, const Points& configuration,
                                   const std::string& label)
    : a_(a) {
    if (!all_finite(a)) {
        throw_singular(label, a, 0.0, configuration);
    }
    const double scale = std::abs(diag_scale) > 0.0 ? std::abs(diag_scale) : 1.0;
    for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
        jitter_ = rel * scale;
        Matrix shifted = a;
        shifted.diagonal().array() += jitter_;
        llt_.compute(shifted);
        if (llt_.info() == Eigen::Success && llt_.rcond() >= kMinReciprocalCondition) {
            return;
        }
    }
    throw_singular(label, a, jitter_, configuration);
}

Vector JitteredCholesky::solve(const Vector& b) const {
    Vector x = llt_.solve(b);
    x += llt_.solve(b - a_ * x);
    return x;
}

Matrix JitteredCholesky::solve(const Matrix& b) const {
    Matrix x = llt_.solve(b);
    x += llt_.solve(b - a_ * x);
    return x;
}

}  // namespace mmdq
