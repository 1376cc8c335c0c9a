#include "mmdq/msip.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "mmdq/errors.hpp"
#include "mmdq/linalg.hpp"

namespace mmdq {

namespace {

constexpr double kWeightUnderflow = 1e-300;
/// Largest log-entry allowed in the scaled kernel matrix.
constexpr double kLogEntryCap = 700.0;

/// Moments of pi at each particle, each row rescaled by exp(-m_i) where
/// m_i = max_l log kappa(x_l, y_i).
struct ScaledMoments {
    Vector log_scale;
    Vector v0;
    Points v1;
};

ScaledMoments scaled_moments(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y) {
    const Points& x = target.samples();
    const Vector& pi = target.weights();
    const Index m = y.rows();
    const Index n = target.size();
    ScaledMoments out{Vector(m), Vector::Zero(m), Points::Zero(m, y.cols())};
    Vector logk(n);
    for (Index i = 0; i < m; ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (Index l = 0; l < n; ++l) {
            logk[l] = spec.log_eval_sq(squared_distance(x.row(l), y.row(i)));
            if (pi[l] > 0.0 && logk[l] > top) {
                top = logk[l];
            }
        }
        out.log_scale[i] = top;
        double s0 = 0.0;
        Point s1 = Point::Zero(y.cols());
        for (Index l = 0; l < n; ++l) {
            const double e = pi[l] * std::exp(logk[l] - top);
            s0 += e;
            s1.noalias() += e * x.row(l);
        }
        out.v0[i] = s0;
        out.v1.row(i) = s1;
    }
    return out;
}

MsipMapResult fast_map(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y) {
    const ScaledMoments sm = scaled_moments(target, spec, y);
    const Index m = y.rows();
    Matrix logk(m, m);
    for (Index i = 0; i < m; ++i) {
        logk(i, i) = std::log(spec.diagonal());
        for (Index j = i + 1; j < m; ++j) {
            logk(i, j) = logk(j, i) = spec.log_eval_sq(squared_distance(y.row(i), y.row(j)));
        }
    }
    // Raise scales until every log K'_ij = logk_ij + m_j - m_i is at most the cap.
    // Raised values sit at least kLogEntryCap below their source, so M passes suffice.
    Vector scale = sm.log_scale;
    for (Index pass = 0; pass < m; ++pass) {
        bool changed = false;
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < m; ++j) {
                const double need = logk(i, j) + scale[j] - kLogEntryCap;
                if (need > scale[i]) {
                    scale[i] = need;
                    changed = true;
                }
            }
        }
        if (!changed) {
            break;
        }
    }
    Vector rescale = (sm.log_scale - scale).array().exp();
    // K'_ij = kappa(y_i, y_j) exp(m_j - m_i) = (D^-1 K D)_ij with D = diag(exp(scale)).
    Matrix ks(m, m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            ks(i, j) = std::exp(logk(i, j) + scale[j] - scale[i]);
        }
    }
    // Conditioning (and the jitter) is judged on the unscaled K; the similarity
    // transform moves the jitter to the same diagonal.
    const JitteredCholesky chol(kernel_matrix(spec, y), spec.diagonal(), y, "K(Y)");
    if (!ks.allFinite()) {
        throw SingularKernelMatrix("log-scaled K(Y) overflows for this configuration", y);
    }
    Matrix shifted = ks;
    shifted.diagonal().array() += chol.jitter();
    const Eigen::PartialPivLU<Matrix> lu(shifted);
    Matrix rhs(m, 1 + y.cols());
    rhs.col(0) = sm.v0.cwiseProduct(rescale);
    rhs.rightCols(y.cols()) = rescale.asDiagonal() * sm.v1;
    // Same single refinement step as JitteredCholesky::solve.
    Matrix sol = lu.solve(rhs);
    sol += lu.solve(rhs - ks * sol);
    if (!sol.allFinite()) {
        throw SingularKernelMatrix("log-scaled K(Y) solve is not finite", y);
    }
    MsipMapResult out{Points(m, y.cols()), Vector(m)};
    for (Index i = 0; i < m; ++i) {
        const double u = sol(i, 0);
        if (!(std::abs(u) >= kWeightUnderflow)) {
            throw DegenerateWeight("optimal weight of particle " + std::to_string(i) + " underflows (" +
                                       std::to_string(u) + " after scaling)",
                                   i);
        }
        out.psi.row(i) = sol.row(i).tail(y.cols()) / u;
        out.weights[i] = std::exp(scale[i]) * u;
    }
    return out;
}

MsipMapResult general_map(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y) {
    const Moments mom = kernel_moments(target, spec, y);
    const Vector w = optimal_weights(spec, y, mom.v0);
    for (Index i = 0; i < w.size(); ++i) {
        if (!(std::abs(w[i]) >= kWeightUnderflow)) {
            throw DegenerateWeight("optimal weight of particle " + std::to_string(i) + " underflows (" +
                                       std::to_string(w[i]) + ")",
                                   i);
        }
    }
    const Matrix kbar = kbar_matrix(spec, y);
    const Points vh = vhat1_from_parts(y, mom.grad_v0(y), kbar, w);
    const JitteredCholesky chol(kbar, spec.companion_diagonal(), y, "Kbar(Y)");
    const Matrix z = chol.solve(Matrix(vh));
    MsipMapResult out{Points(y.rows(), y.cols()), w};
    for (Index i = 0; i < y.rows(); ++i) {
        out.psi.row(i) = z.row(i) / w[i];
    }
    return out;
}

bool use_fast(const KernelSpec& spec, MsipPath path) {
    if (path == MsipPath::Fast) {
        if (!spec.companion_ratio_constant()) {
            throw InputError("msip: the fast path needs a kernel with kbar proportional to kappa");
        }
        return true;
    }
    return path == MsipPath::Auto && spec.companion_ratio_constant().has_value();
}

double fm_from_weights(const MomentCache& cache, const Vector& w, const Vector& v0) {
    return std::max(0.0, 0.5 * (cache.c_pi - w.dot(v0)));
}

struct Snapshot {
    Vector weights;
    double mmd = 0.0;
    double fm = 0.0;
    double residual = 0.0;
};

/// Diagnostics at Y given w_hat(Y).
Snapshot snapshot(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y, const MomentCache& cache,
                  const Vector& w) {
    const Moments mom = kernel_moments(target, spec, y);
    const Matrix k = kernel_matrix(spec, y);
    const Matrix kbar = kbar_matrix(spec, y);
    const Points vh = vhat1_from_parts(y, mom.grad_v0(y), kbar, w);
    Points wy = y;
    for (Index i = 0; i < y.rows(); ++i) {
        wy.row(i) *= w[i];
    }
    Snapshot s;
    s.weights = w;
    s.mmd = mmd_from_parts(cache.c_pi, w, mom.v0, k);
    s.fm = fm_from_weights(cache, w, mom.v0);
    s.residual = (kbar * wy - vh).norm() / std::sqrt(static_cast<double>(y.size()));
    return s;
}

}  // namespace

void MsipConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw InputError("msip: eta must lie in [0, 1]");
    }
    if (max_iterations < 0) {
        throw InputError("msip: max_iterations must be nonnegative");
    }
    if (!(stationarity_tol >= 0.0)) {
        throw InputError("msip: stationarity_tol must be nonnegative");
    }
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) {
        throw InputError("msip: step_shrink must lie in (0, 1)");
    }
    if (max_shrinks < 0) {
        throw InputError("msip: max_shrinks must be nonnegative");
    }
}

MsipMapResult msip_map_detailed(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                                MsipPath path) {
    if (positions.cols() != target.dim() || positions.rows() < 1) {
        throw InputError("msip: configuration does not match target dimension");
    }
    return use_fast(spec, path) ? fast_map(target, spec, positions) : general_map(target, spec, positions);
}

Points msip_map(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                const MomentCache& /*cache*/, MsipPath path) {
    return msip_map_detailed(target, spec, positions, path).psi;
}

namespace {

struct Backtrack {
    MsipStepResult step;
    /// Map at the accepted positions (unset when exhausted).
    MsipMapResult next_map;
};

/// fm at y from the weights of the map at y, the same evaluation run_msip records.
double map_fm(const EmpiricalTarget& target, const KernelSpec& spec, const Points& y, const MomentCache& cache,
              const MsipMapResult& map) {
    return fm_from_weights(cache, map.weights, kernel_moments(target, spec, y).v0);
}

Backtrack backtrack(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                    const MsipMapResult& map, const MomentCache& cache, const MsipConfig& config) {
    Backtrack out;
    MsipStepResult& r = out.step;
    r.eta = config.eta;
    r.fm_before = map_fm(target, spec, positions, cache, map);
    for (;;) {
        Points trial = (1.0 - r.eta) * positions + r.eta * map.psi;
        bool ok = false;
        try {
            out.next_map = msip_map_detailed(target, spec, trial, config.path);
            const double f = map_fm(target, spec, trial, cache, out.next_map);
            if (f <= r.fm_before) {
                r.fm_after = f;
                ok = true;
            }
        } catch (const SingularKernelMatrix&) {
            ok = false;
        } catch (const DegenerateWeight&) {
            ok = false;
        }
        if (ok) {
            r.positions = std::move(trial);
            return out;
        }
        if (r.shrinks == config.max_shrinks) {
            r.exhausted = true;
            r.positions = positions;
            r.eta = 0.0;
            r.fm_after = r.fm_before;
            out.next_map = MsipMapResult{};
            return out;
        }
        r.eta *= config.step_shrink;
        ++r.shrinks;
    }
}

}  // namespace

MsipStepResult msip_step_detailed(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                                  const MomentCache& cache, const MsipConfig& config) {
    config.validate();
    const MsipMapResult map = msip_map_detailed(target, spec, positions, config.path);
    if (config.descent_mode == DescentMode::FixedEta) {
        MsipStepResult r;
        r.eta = config.eta;
        r.positions = (1.0 - r.eta) * positions + r.eta * map.psi;
        return r;
    }
    return backtrack(target, spec, positions, map, cache, config).step;
}

Points msip_step(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                 const MomentCache& cache, const MsipConfig& config) {
    return msip_step_detailed(target, spec, positions, cache, config).positions;
}

double stationarity_residual(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions) {
    const Vector w = optimal_weights(target, spec, positions);
    return snapshot(target, spec, positions, MomentCache{}, w).residual;
}

Trace run_msip(const Points& initial, const EmpiricalTarget& target, const KernelSpec& spec,
               const MomentCache& cache, const MsipConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(clock::now() - start).count(); };
    config.validate();
    if (initial.cols() != target.dim() || initial.rows() < 1 || !initial.allFinite()) {
        throw InputError("msip: invalid initial configuration");
    }

    Trace trace;
    trace.extra_columns = {"fm", "residual"};
    Points y = initial;
    long it = 0;
    MsipMapResult map;
    try {
        map = msip_map_detailed(target, spec, y, config.path);
        for (;;) {
            const Snapshot snap = snapshot(target, spec, y, cache, map.weights);
            trace.add(it, static_cast<double>(it), snap.mmd, snap.weights, elapsed_ms(), {snap.fm, snap.residual});
            if (snap.residual <= config.stationarity_tol) {
                trace.stop_reason = "stationary";
                break;
            }
            if (it == config.max_iterations) {
                trace.stop_reason = "max_iterations";
                break;
            }
            if (config.descent_mode == DescentMode::FixedEta) {
                Points next = (1.0 - config.eta) * y + config.eta * map.psi;
                if (!next.allFinite()) {
                    throw NonFiniteState("msip produced a non-finite configuration", it + 1);
                }
                y = std::move(next);
                ++it;
                map = msip_map_detailed(target, spec, y, config.path);
            } else {
                Backtrack bt = backtrack(target, spec, y, map, cache, config);
                if (bt.step.exhausted) {
                    trace.warnings.push_back("backtracking exhausted after " + std::to_string(config.max_shrinks) +
                                             " shrinks at iteration " + std::to_string(it + 1) +
                                             "; positions kept");
                    trace.stop_reason = "backtracking_exhausted";
                    break;
                }
                y = std::move(bt.step.positions);
                ++it;
                map = std::move(bt.next_map);
            }
        }
    } catch (const SingularKernelMatrix& e) {
        throw SingularKernelMatrix("msip iteration " + std::to_string(it) + ": " + e.what(), e.configuration());
    } catch (const DegenerateWeight& e) {
        throw DegenerateWeight("msip iteration " + std::to_string(it) + ": " + e.what(), e.particle());
    }
    trace.final_state.positions = y;
    trace.final_state.weights = map.weights;
    trace.final_state.time = static_cast<double>(it);
    return trace;
}

}  // namespace mmdq
