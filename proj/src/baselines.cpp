#include "mmdq/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "mmdq/dynamics.hpp"
#include "mmdq/errors.hpp"

namespace mmdq {

namespace {

double uniform_mmd(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y, const MomentCache& cache) {
    const Vector w = Vector::Constant(y.rows(), 1.0 / static_cast<double>(y.rows()));
    return mmd_from_parts(cache.c_pi, w, kernel_moments(target, spec, y).v0, kernel_matrix(spec, y));
}

double optimal_mmd(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y, const MomentCache& cache,
                   Vector* weights) {
    const Vector v0 = kernel_moments(target, spec, y).v0;
    try {
        Vector w = optimal_weights(spec, y, v0);
        const double out = mmd_from_parts(cache.c_pi, w, v0, kernel_matrix(spec, y));
        if (weights) {
            *weights = std::move(w);
        }
        return out;
    } catch (const SingularKernelMatrix&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

std::string to_string(BaselineAlgorithm algorithm) {
    switch (algorithm) {
        case BaselineAlgorithm::Lloyd: return "lloyd";
        case BaselineAlgorithm::IIDMeanShift: return "iidms";
        case BaselineAlgorithm::MMDGF: return "mmdgf";
        case BaselineAlgorithm::DMGD: return "dmgd";
    }
    return "?";
}

BaselineAlgorithm parse_baseline(const std::string& name) {
    if (name == "lloyd" || name == "kmeans") return BaselineAlgorithm::Lloyd;
    if (name == "iidms" || name == "meanshift" || name == "mean_shift") return BaselineAlgorithm::IIDMeanShift;
    if (name == "mmdgf") return BaselineAlgorithm::MMDGF;
    if (name == "dmgd") return BaselineAlgorithm::DMGD;
    throw InputError("unknown baseline '" + name + "'");
}

void BaselineConfig::validate() const {
    if (!(step_size > 0.0)) {
        throw InputError("baseline: step_size must be positive");
    }
    if (!(noise_beta >= 0.0)) {
        throw InputError("baseline: noise_beta must be nonnegative");
    }
    if (max_iterations < 0) {
        throw InputError("baseline: max_iterations must be nonnegative");
    }
}

LloydStep lloyd_step_detailed(const EmpiricalTarget& target, const Points& positions) {
    if (positions.cols() != target.dim() || positions.rows() < 1) {
        throw InputError("lloyd: configuration does not match target dimension");
    }
    const Points& x = target.samples();
    const Vector& pi = target.weights();
    const Index m = positions.rows();
    Points sums = Points::Zero(m, x.cols());
    Vector mass = Vector::Zero(m);
    LloydStep out;
    for (Index l = 0; l < target.size(); ++l) {
        Index best = 0;
        double best_d = squared_distance(x.row(l), positions.row(0));
        for (Index i = 1; i < m; ++i) {
            const double d = squared_distance(x.row(l), positions.row(i));
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        sums.row(best) += pi[l] * x.row(l);
        mass[best] += pi[l];
        out.distortion += pi[l] * best_d;
    }
    out.positions = positions;
    for (Index i = 0; i < m; ++i) {
        if (mass[i] > 0.0) {
            out.positions.row(i) = sums.row(i) / mass[i];
        } else {
            ++out.empty_cells;
        }
    }
    return out;
}

Points lloyd_step(const EmpiricalTarget& target, const Points& positions) {
    return lloyd_step_detailed(target, positions).positions;
}

Point mean_shift_step(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y) {
    if (y.size() != target.dim()) {
        throw InputError("mean shift: dimension mismatch");
    }
    const Points& x = target.samples();
    const Vector& pi = target.weights();
    const Index n = target.size();
    Vector logk(n);
    double top = -std::numeric_limits<double>::infinity();
    for (Index l = 0; l < n; ++l) {
        const double r2 = squared_distance(x.row(l), y);
        logk[l] = spec.log_eval_sq(r2) + std::log(spec.companion_ratio_sq(r2));
        if (pi[l] > 0.0 && logk[l] > top) {
            top = logk[l];
        }
    }
    double den = 0.0;
    Point num = Point::Zero(y.size());
    for (Index l = 0; l < n; ++l) {
        const double e = pi[l] * std::exp(logk[l] - top);
        den += e;
        num.noalias() += e * x.row(l);
    }
    return num / den;
}

Points mean_shift_all(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions, double eta) {
    Points out(positions.rows(), positions.cols());
    for (Index i = 0; i < positions.rows(); ++i) {
        out.row(i) = (1.0 - eta) * positions.row(i) + eta * mean_shift_step(target, spec, positions.row(i));
    }
    return out;
}

Points mmdgf_step(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions, double eta,
                  double noise_beta, long t, const CounterRng& rng) {
    const Index m = positions.rows();
    const Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
    Points out = positions + eta * wfr_transport(positions, w, target, spec, 1.0);
    if (noise_beta > 0.0) {
        if (t < 1) {
            throw InputError("mmdgf: iteration index must be >= 1 when noise is on");
        }
        const double sd = std::sqrt(noise_beta / std::sqrt(static_cast<double>(t)));
        for (Index i = 0; i < m; ++i) {
            CounterRng local = rng.split(static_cast<std::uint64_t>(i)).split(static_cast<std::uint64_t>(t));
            std::normal_distribution<double> normal(0.0, sd);
            for (Index k = 0; k < out.cols(); ++k) {
                out(i, k) += normal(local);
            }
        }
    }
    return out;
}

Points dmgd_step(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                 const MomentCache& cache, double eta) {
    return positions - eta * grad_fm(target, spec, positions, cache);
}

Trace run_baseline(const Points& initial, const EmpiricalTarget& target, const KernelSpec& spec,
                   const MomentCache& cache, const BaselineConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(clock::now() - start).count(); };
    config.validate();
    if (initial.cols() != target.dim() || initial.rows() < 1 || !initial.allFinite()) {
        throw InputError("baseline: invalid initial configuration");
    }
    const Index m = initial.rows();
    const Vector uniform = Vector::Constant(m, 1.0 / static_cast<double>(m));
    const CounterRng noise = make_stream(config.seed, Stream::Noise);

    Trace trace;
    Points y = initial;
    auto record = [&](long it, long empty) {
        switch (config.algorithm) {
            case BaselineAlgorithm::Lloyd: {
                const double opt = optimal_mmd(target, spec, y, cache, nullptr);
                trace.add(it, static_cast<double>(it), uniform_mmd(target, spec, y, cache), uniform, elapsed_ms(),
                          {static_cast<double>(empty), opt});
                break;
            }
            case BaselineAlgorithm::DMGD: {
                const Vector v0 = kernel_moments(target, spec, y).v0;
                const Vector w = optimal_weights(spec, y, v0);
                trace.add(it, static_cast<double>(it), mmd_from_parts(cache.c_pi, w, v0, kernel_matrix(spec, y)), w,
                          elapsed_ms());
                break;
            }
            default:
                trace.add(it, static_cast<double>(it), uniform_mmd(target, spec, y, cache), uniform, elapsed_ms());
        }
    };
    if (config.algorithm == BaselineAlgorithm::Lloyd) {
        trace.extra_columns = {"empty_cells", "mmd_optimal"};
    }

    long it = 0;
    long empty = 0;
    try {
        record(0, 0);
        for (it = 1; it <= config.max_iterations; ++it) {
            switch (config.algorithm) {
                case BaselineAlgorithm::Lloyd: {
                    LloydStep s = lloyd_step_detailed(target, y);
                    empty = s.empty_cells;
                    y = std::move(s.positions);
                    break;
                }
                case BaselineAlgorithm::IIDMeanShift:
                    y = mean_shift_all(target, spec, y, config.step_size);
                    break;
                case BaselineAlgorithm::MMDGF:
                    y = mmdgf_step(target, spec, y, config.step_size, config.noise_beta, it, noise);
                    break;
                case BaselineAlgorithm::DMGD:
                    y = dmgd_step(target, spec, y, cache, config.step_size);
                    break;
            }
            if (!y.allFinite()) {
                throw NonFiniteState(to_string(config.algorithm) + " produced a non-finite configuration", it);
            }
            record(it, empty);
        }
    } catch (const SingularKernelMatrix& e) {
        throw SingularKernelMatrix(to_string(config.algorithm) + " iteration " + std::to_string(it) + ": " + e.what(),
                                   e.configuration());
    }
    trace.stop_reason = "max_iterations";
    trace.final_state.positions = y;
    trace.final_state.time = static_cast<double>(config.max_iterations);
    if (config.algorithm == BaselineAlgorithm::DMGD) {
        trace.final_state.weights = optimal_weights(target, spec, y);
    } else {
        trace.final_state.weights = uniform;
    }
    return trace;
}

}  // namespace mmdq
