#include "mmdq/embedding.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mmdq/errors.hpp"
#include "mmdq/linalg.hpp"
#include "mmdq/rng.hpp"

namespace mmdq {

EmpiricalTarget::EmpiricalTarget(Points samples)
    : samples_(std::move(samples)), weights_(Vector::Constant(samples_.rows(), samples_.rows() ? 1.0 / samples_.rows() : 0.0)) {
    validate();
}

EmpiricalTarget::EmpiricalTarget(Points samples, Vector weights)
    : samples_(std::move(samples)), weights_(std::move(weights)), uniform_(false) {
    validate();
}

void EmpiricalTarget::validate() const {
    if (samples_.rows() < 1 || samples_.cols() < 1) {
        throw InputError("target: need at least one sample of dimension >= 1");
    }
    if (!samples_.allFinite()) {
        throw InputError("target: samples contain NaN or Inf");
    }
    if (weights_.size() != samples_.rows()) {
        throw InputError("target: " + std::to_string(weights_.size()) + " weights for " +
                         std::to_string(samples_.rows()) + " samples");
    }
    if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
        throw InputError("target: sample weights must be finite and nonnegative");
    }
    if (std::abs(weights_.sum() - 1.0) > 1e-12) {
        throw InputError("target: sample weights must sum to 1");
    }
}

Point EmpiricalTarget::lower() const { return samples_.colwise().minCoeff(); }

Point EmpiricalTarget::upper() const { return samples_.colwise().maxCoeff(); }

void WeightedQuantization::validate(Index dim) const {
    if (positions.rows() < 1) {
        throw InputError("quantization: need at least one particle");
    }
    if (positions.cols() != dim) {
        throw InputError("quantization: particle dimension " + std::to_string(positions.cols()) +
                         " does not match target dimension " + std::to_string(dim));
    }
    if (weights.size() != positions.rows()) {
        throw InputError("quantization: weight count does not match particle count");
    }
    if (!positions.allFinite() || !weights.allFinite()) {
        throw InputError("quantization: non-finite entries");
    }
}

MomentCache MomentCache::exact(const EmpiricalTarget& target, const KernelSpec& spec) {
    const Points& x = target.samples();
    const Vector& pi = target.weights();
    const Index n = target.size();
    // Row sums first, then a fixed-order outer sum: deterministic and symmetric.
    Vector row(n);
    for (Index a = 0; a < n; ++a) {
        double acc = pi[a] * spec.diagonal();
        for (Index b = 0; b < n; ++b) {
            if (b != a) {
                acc += pi[b] * spec.eval_sq(squared_distance(x.row(a), x.row(b)));
            }
        }
        row[a] = pi[a] * acc;
    }
    MomentCache cache;
    cache.c_pi = std::max(0.0, row.sum());
    return cache;
}

MomentCache MomentCache::subsampled(const EmpiricalTarget& target, const KernelSpec& spec, long pairs,
                                    std::uint64_t seed) {
    if (pairs <= 0) {
        return exact(target, spec);
    }
    CounterRng rng = make_stream(seed, Stream::Cache);
    const Vector& pi = target.weights();
    std::discrete_distribution<Index> pick(pi.data(), pi.data() + pi.size());
    double acc = 0.0;
    for (long p = 0; p < pairs; ++p) {
        const Index a = pick(rng);
        const Index b = pick(rng);
        acc += spec.eval_sq(squared_distance(target.samples().row(a), target.samples().row(b)));
    }
    MomentCache cache;
    cache.c_pi = acc / static_cast<double>(pairs);
    cache.pairs = pairs;
    return cache;
}

Points Moments::grad_v0(const Points& positions) const {
    Points g = vbar1;
    for (Index i = 0; i < g.rows(); ++i) {
        g.row(i) -= vbar0[i] * positions.row(i);
    }
    return g;
}

Moments kernel_moments(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions) {
    if (positions.cols() != target.dim()) {
        throw InputError("moments: particle dimension does not match target dimension");
    }
    const Points& x = target.samples();
    const Vector& pi = target.weights();
    const Index m = positions.rows();
    const Index d = target.dim();
    Moments out{Vector::Zero(m), Points::Zero(m, d), Vector::Zero(m), Points::Zero(m, d)};
    Eigen::ArrayXd k;
    Eigen::ArrayXd kb;
    for (Index i = 0; i < m; ++i) {
        const Eigen::ArrayXd r2 = (x.rowwise() - positions.row(i)).rowwise().squaredNorm().array();
        spec.eval_batch(r2, k, kb);
        k *= pi.array();
        kb *= pi.array();
        out.v0[i] = k.sum();
        out.vbar0[i] = kb.sum();
        out.v1.row(i).noalias() = k.matrix().transpose() * x;
        out.vbar1.row(i).noalias() = kb.matrix().transpose() * x;
    }
    return out;
}

namespace {

Points single_row(PointRef y) {
    Points p(1, y.size());
    p.row(0) = y;
    return p;
}

}  // namespace

double v0(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y) {
    return kernel_moments(target, spec, single_row(y)).v0[0];
}

Point v1(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y) {
    return kernel_moments(target, spec, single_row(y)).v1.row(0);
}

double vbar0(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y) {
    return kernel_moments(target, spec, single_row(y)).vbar0[0];
}

Point vbar1(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y) {
    return kernel_moments(target, spec, single_row(y)).vbar1.row(0);
}

Point grad_v0(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y) {
    const Points p = single_row(y);
    return kernel_moments(target, spec, p).grad_v0(p).row(0);
}

Matrix kernel_matrix(const KernelSpec& spec, const Points& positions) {
    const Index m = positions.rows();
    Matrix k(m, m);
    for (Index i = 0; i < m; ++i) {
        k(i, i) = spec.diagonal();
        for (Index j = i + 1; j < m; ++j) {
            k(i, j) = k(j, i) = spec.eval_sq(squared_distance(positions.row(i), positions.row(j)));
        }
    }
    return k;
}

Matrix kbar_matrix(const KernelSpec& spec, const Points& positions) {
    const Index m = positions.rows();
    Matrix k(m, m);
    for (Index i = 0; i < m; ++i) {
        k(i, i) = spec.companion_diagonal();
        for (Index j = i + 1; j < m; ++j) {
            k(i, j) = k(j, i) = spec.companion_sq(squared_distance(positions.row(i), positions.row(j)));
        }
    }
    return k;
}

Vector optimal_weights(const KernelSpec& spec, const Points& positions, const Vector& v0_at_positions) {
    const JitteredCholesky chol(kernel_matrix(spec, positions), spec.diagonal(), positions, "K(Y)");
    return chol.solve(v0_at_positions);
}

Vector optimal_weights(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions) {
    return optimal_weights(spec, positions, kernel_moments(target, spec, positions).v0);
}

double mmd_from_parts(double c_pi, const Vector& weights, const Vector& v0_at_positions, const Matrix& gram) {
    const double sq = c_pi - 2.0 * weights.dot(v0_at_positions) + weights.dot(gram * weights);
    return std::sqrt(std::max(0.0, sq));
}

double mmd(const EmpiricalTarget& target, const KernelSpec& spec, const WeightedQuantization& quantization,
           const MomentCache& cache) {
    quantization.validate(target.dim());
    const Vector v = kernel_moments(target, spec, quantization.positions).v0;
    return mmd_from_parts(cache.c_pi, quantization.weights, v, kernel_matrix(spec, quantization.positions));
}

double fm(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
          const MomentCache& cache) {
    const Vector v = kernel_moments(target, spec, positions).v0;
    const Vector w = optimal_weights(spec, positions, v);
    return std::max(0.0, 0.5 * (cache.c_pi - w.dot(v)));
}

Points vhat1_from_parts(const Points& positions, const Points& grad_v0_rows, const Matrix& kbar,
                        const Vector& weights) {
    const Vector coupling = kbar * weights;  // kbar symmetric: row i = sum_m w_m kbar(y_m, y_i)
    Points out = grad_v0_rows;
    for (Index i = 0; i < out.rows(); ++i) {
        out.row(i) += coupling[i] * positions.row(i);
    }
    return out;
}

Points vhat1(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions, const Vector& weights) {
    if (weights.size() != positions.rows()) {
        throw InputError("vhat1: weight count does not match particle count");
    }
    const Moments mom = kernel_moments(target, spec, positions);
    return vhat1_from_parts(positions, mom.grad_v0(positions), kbar_matrix(spec, positions), weights);
}

Points grad_fm(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
               const MomentCache& /*cache*/) {
    const Moments mom = kernel_moments(target, spec, positions);
    const Vector w = optimal_weights(spec, positions, mom.v0);
    const Matrix kbar = kbar_matrix(spec, positions);
    const Points vh = vhat1_from_parts(positions, mom.grad_v0(positions), kbar, w);
    Points wy = positions;
    for (Index i = 0; i < wy.rows(); ++i) {
        wy.row(i) *= w[i];
    }
    Points g = kbar * wy - vh;
    for (Index i = 0; i < g.rows(); ++i) {
        g.row(i) *= w[i];
    }
    return g;
}

}  // namespace mmdq
