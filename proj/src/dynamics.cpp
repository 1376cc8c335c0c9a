#include "mmdq/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mmdq/errors.hpp"

namespace mmdq {

namespace {

constexpr double kWeightFloor = 1e-300;

FlowState advance(const FlowState& s, double h, const FlowRate& k) {
    FlowState out{s.positions + h * k.positions, s.weights + h * k.weights, s.time + h};
    return out;
}

/// Keeps frozen weights bit-identical across a step.
void keep_frozen(const FlowState& from, FlowState& to) {
    for (Index i = 0; i < from.weights.size(); ++i) {
        if (std::abs(from.weights[i]) < kWeightFloor) {
            to.weights[i] = from.weights[i];
        }
    }
}

double state_mmd(const FlowState& s, const EmpiricalTarget& target, const KernelSpec& spec,
                 const MomentCache& cache) {
    const Vector v = kernel_moments(target, spec, s.positions).v0;
    return mmd_from_parts(cache.c_pi, s.weights, v, kernel_matrix(spec, s.positions));
}

void check_finite(const FlowState& s, long step, double h) {
    if (!s.positions.allFinite() || !s.weights.allFinite()) {
        throw NonFiniteState("non-finite particle state at step " + std::to_string(step) + " (step size " +
                                 std::to_string(h) + "); try a smaller step or the adaptive solver",
                             step);
    }
}

double rms_error(const FlowState& y0, const FlowState& y1, const FlowRate& err, double h, double rtol, double atol) {
    double acc = 0.0;
    long count = 0;
    auto add = [&](double a, double b, double e) {
        const double scale = atol + rtol * std::max(std::abs(a), std::abs(b));
        const double q = h * e / scale;
        acc += q * q;
        ++count;
    };
    for (Index i = 0; i < y0.positions.size(); ++i) {
        add(y0.positions.data()[i], y1.positions.data()[i], err.positions.data()[i]);
    }
    for (Index i = 0; i < y0.weights.size(); ++i) {
        add(y0.weights[i], y1.weights[i], err.weights[i]);
    }
    return std::sqrt(acc / static_cast<double>(count));
}

FlowRate combine(std::initializer_list<std::pair<double, const FlowRate*>> terms) {
    FlowRate out{Points::Zero(terms.begin()->second->positions.rows(), terms.begin()->second->positions.cols()),
                 Vector::Zero(terms.begin()->second->weights.size())};
    for (const auto& [c, k] : terms) {
        out.positions += c * k->positions;
        out.weights += c * k->weights;
    }
    return out;
}

double norm_of(const FlowState& s) {
    return std::sqrt((s.positions.squaredNorm() + s.weights.squaredNorm()) /
                     static_cast<double>(s.positions.size() + s.weights.size()));
}

double norm_of(const FlowRate& k) {
    return std::sqrt((k.positions.squaredNorm() + k.weights.squaredNorm()) /
                     static_cast<double>(k.positions.size() + k.weights.size()));
}

}  // namespace

std::string to_string(Solver solver) {
    switch (solver) {
        case Solver::Euler: return "euler";
        case Solver::RK4: return "rk4";
        case Solver::AdaptiveRK23: return "rk23";
    }
    return "?";
}

Solver parse_solver(const std::string& name) {
    if (name == "euler") return Solver::Euler;
    if (name == "rk4") return Solver::RK4;
    if (name == "rk23" || name == "adaptive") return Solver::AdaptiveRK23;
    throw InputError("unknown solver '" + name + "' (euler, rk4, rk23)");
}

Points wfr_transport(const Points& positions, const Vector& weights, const EmpiricalTarget& target,
                     const KernelSpec& spec, double alpha) {
    const Moments mom = kernel_moments(target, spec, positions);
    const Matrix kbar = kbar_matrix(spec, positions);
    const Points gv0 = mom.grad_v0(positions);
    const Index m = positions.rows();
    Points out(m, positions.cols());
    for (Index i = 0; i < m; ++i) {
        Point acc = Point::Zero(positions.cols());
        for (Index j = 0; j < m; ++j) {
            if (j != i) {
                acc.noalias() += (weights[j] * kbar(j, i)) * (positions.row(j) - positions.row(i));
            }
        }
        out.row(i) = -alpha * (acc - gv0.row(i));
    }
    return out;
}

FlowRate wfr_rhs(const FlowState& state, const EmpiricalTarget& target, const KernelSpec& spec, double alpha) {
    if (!(alpha > 0.0)) {
        throw InputError("wfr: alpha must be positive");
    }
    const Points& y = state.positions;
    const Vector& w = state.weights;
    if (w.size() != y.rows()) {
        throw InputError("wfr: weight count does not match particle count");
    }
    const Moments mom = kernel_moments(target, spec, y);
    const Matrix k = kernel_matrix(spec, y);
    const Matrix kbar = kbar_matrix(spec, y);
    const Points gv0 = mom.grad_v0(y);
    const Index m = y.rows();
    FlowRate rate{Points(m, y.cols()), Vector(m)};
    for (Index i = 0; i < m; ++i) {
        Point acc = Point::Zero(y.cols());
        double react = 0.0;
        for (Index j = 0; j < m; ++j) {
            react += w[j] * k(j, i);
            if (j != i) {
                acc.noalias() += (w[j] * kbar(j, i)) * (y.row(j) - y.row(i));
            }
        }
        rate.positions.row(i) = -alpha * (acc - gv0.row(i));
        rate.weights[i] = std::abs(w[i]) < kWeightFloor ? 0.0 : -w[i] * (react - mom.v0[i]);
    }
    return rate;
}

FlowState euler_step(const FlowState& state, const EmpiricalTarget& target, const KernelSpec& spec, double alpha,
                     double eta) {
    FlowState next = advance(state, eta, wfr_rhs(state, target, spec, alpha));
    keep_frozen(state, next);
    return next;
}

Trace simulate(const FlowState& initial, const EmpiricalTarget& target, const KernelSpec& spec,
               const MomentCache& cache, double alpha, const SimulateOptions& opt) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(clock::now() - start).count(); };
    if (initial.positions.cols() != target.dim() || initial.weights.size() != initial.positions.rows()) {
        throw InputError("simulate: initial state does not match target dimension or weight count");
    }
    if (opt.max_iterations < 0) {
        throw InputError("simulate: max_iterations must be nonnegative");
    }

    Trace trace;
    FlowState s = initial;
    check_finite(s, 0, 0.0);
    double prev = state_mmd(s, target, spec, cache);
    trace.add(0, s.time, prev, s.weights, elapsed_ms());

    long iteration = 0;
    auto record = [&](long it) {
        check_finite(s, it, 0.0);
        const double cur = state_mmd(s, target, spec, cache);
        if (!std::isfinite(cur)) {
            throw NonFiniteState("non-finite mmd at step " + std::to_string(it), it);
        }
        if (cur > prev + opt.descent_slack && trace.warnings.size() < 100) {
            trace.warnings.push_back("descent violation at iteration " + std::to_string(it) + ": mmd rose by " +
                                     std::to_string(cur - prev));
        }
        prev = cur;
        trace.add(it, s.time, cur, s.weights, elapsed_ms());
    };
    auto time_left = [&] { return opt.max_time - s.time; };
    auto rhs = [&](const FlowState& x) { return wfr_rhs(x, target, spec, alpha); };

    if (opt.solver == Solver::Euler || opt.solver == Solver::RK4) {
        if (!(opt.step > 0.0)) {
            throw InputError("simulate: fixed step must be positive");
        }
        const long per_step = opt.solver == Solver::RK4 ? 4 : 1;
        while (iteration + per_step <= opt.max_iterations && time_left() > 0.0) {
            const double h = std::min(opt.step, time_left());
            FlowState next;
            if (opt.solver == Solver::Euler) {
                next = advance(s, h, rhs(s));
            } else {
                const FlowRate k1 = rhs(s);
                const FlowRate k2 = rhs(advance(s, 0.5 * h, k1));
                const FlowRate k3 = rhs(advance(s, 0.5 * h, k2));
                const FlowRate k4 = rhs(advance(s, h, k3));
                next = advance(s, h, combine({{1.0 / 6, &k1}, {2.0 / 6, &k2}, {2.0 / 6, &k3}, {1.0 / 6, &k4}}));
            }
            keep_frozen(s, next);
            next.time = s.time + h;
            iteration += per_step;
            check_finite(next, iteration, h);
            s = std::move(next);
            record(iteration);
        }
        trace.stop_reason = time_left() > 0.0 ? "max_iterations" : "max_time";
        trace.final_state = s;
        return trace;
    }

    // Bogacki-Shampine 3(2) with first-same-as-last.
    FlowRate k1 = rhs(s);
    double h = opt.step;
    if (!(h > 0.0)) {
        const double d0 = norm_of(s);
        const double d1 = norm_of(k1);
        const double scale = opt.atol + opt.rtol * d0;
        h = (d0 < 1e-5 * scale || d1 < 1e-5 * scale) ? 1e-6 : 0.01 * d0 / d1;
        if (!(h > 0.0) || !std::isfinite(h)) {
            h = 1e-6;
        }
    }
    while (iteration < opt.max_iterations && time_left() > 0.0) {
        h = std::min(h, time_left());
        if (h < opt.min_step) {
            if (time_left() < opt.min_step) {
                break;
            }
            throw StepUnderflow("adaptive step " + std::to_string(h) + " below floor " +
                                std::to_string(opt.min_step) + " at t = " + std::to_string(s.time));
        }
        const FlowRate k2 = rhs(advance(s, 0.5 * h, k1));
        const FlowRate k3 = rhs(advance(s, 0.75 * h, k2));
        FlowState next = advance(s, h, combine({{2.0 / 9, &k1}, {1.0 / 3, &k2}, {4.0 / 9, &k3}}));
        keep_frozen(s, next);
        next.time = s.time + h;
        if (!next.positions.allFinite() || !next.weights.allFinite()) {
            h *= 0.2;
            continue;
        }
        const FlowRate k4 = rhs(next);
        const FlowRate err = combine({{5.0 / 72, &k1}, {-1.0 / 12, &k2}, {-1.0 / 9, &k3}, {1.0 / 8, &k4}});
        const double en = rms_error(s, next, err, h, opt.rtol, opt.atol);
        if (!std::isfinite(en)) {
            h *= 0.2;
            continue;
        }
        if (en <= 1.0) {
            const double factor = en == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(en, -1.0 / 3.0));
            s = std::move(next);
            k1 = k4;
            ++iteration;
            record(iteration);
            h *= factor;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(en, -1.0 / 3.0));
        }
    }
    trace.stop_reason = time_left() > 0.0 ? "max_iterations" : "max_time";
    trace.final_state = s;
    return trace;
}

}  // namespace mmdq
