#pragma once

#include <limits>
#include <string>

#include "mmdq/embedding.hpp"
#include "mmdq/trace.hpp"

namespace mmdq {

/// Time derivative of a FlowState.
struct FlowRate {
    Points positions;
    Vector weights;
};

/// Particle WFR system with reaction speed 1:
///   dy_i/dt = -alpha (sum_m w_m grad2 kappa(y_m, y_i) - grad v0(y_i))
///   dw_i/dt = -w_i (sum_m w_m kappa(y_m, y_i) - v0(y_i))
/// Weights with |w_i| < 1e-300 are frozen (zero rate).
FlowRate wfr_rhs(const FlowState& state, const EmpiricalTarget& target, const KernelSpec& spec, double alpha);

/// The transport term alone (first line above).
Points wfr_transport(const Points& positions, const Vector& weights, const EmpiricalTarget& target,
                     const KernelSpec& spec, double alpha);

/// One explicit Euler step of size eta.
FlowState euler_step(const FlowState& state, const EmpiricalTarget& target, const KernelSpec& spec, double alpha,
                     double eta);

enum class Solver { Euler, RK4, AdaptiveRK23 };

std::string to_string(Solver solver);
Solver parse_solver(const std::string& name);

struct SimulateOptions {
    Solver solver = Solver::AdaptiveRK23;
    /// Euler and AdaptiveRK23: accepted steps. RK4: right-hand-side
    /// evaluations, so RK4 takes max_iterations / 4 steps.
    long max_iterations = 1000;
    double max_time = std::numeric_limits<double>::infinity();
    /// Fixed step for Euler / RK4; first trial step for AdaptiveRK23 (0 = automatic).
    double step = 1e-2;
    double rtol = 1e-6;
    double atol = 1e-9;
    double min_step = 1e-12;
    /// Slack before a rise in mmd is flagged as a descent violation.
    double descent_slack = 1e-8;
};

/// Integrates the WFR system from `initial`, recording mmd with the current
/// weights after every accepted step (record 0 is the initial state).
/// Throws NonFiniteState or StepUnderflow.
Trace simulate(const FlowState& initial, const EmpiricalTarget& target, const KernelSpec& spec,
               const MomentCache& cache, double alpha, const SimulateOptions& options);

}  // namespace mmdq
