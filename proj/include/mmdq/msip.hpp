#pragma once

#include "mmdq/embedding.hpp"
#include "mmdq/trace.hpp"

namespace mmdq {

enum class DescentMode { FixedEta, Backtracking };

/// Which formula evaluates the MSIP map.
///   General: W^-1 Kbar^-1 vhat1.
///   Fast:    W^-1 K^-1 v1, valid when kbar = lambda * kappa (SE). Computed
///            with per-particle log scaling, so it stays finite for particles
///            far from every sample.
///   Auto:    Fast when the kernel allows it.
enum class MsipPath { Auto, General, Fast };

struct MsipConfig {
    double eta = 0.8;
    long max_iterations = 100;
    double stationarity_tol = 1e-8;
    double step_shrink = 0.5;
    int max_shrinks = 30;
    DescentMode descent_mode = DescentMode::FixedEta;
    MsipPath path = MsipPath::Auto;

    void validate() const;
};

/// Psi(Y) together with the optimal weights w_hat(Y) it was computed from.
struct MsipMapResult {
    Points psi;
    Vector weights;
};

/// Throws SingularKernelMatrix (K or Kbar) or DegenerateWeight.
MsipMapResult msip_map_detailed(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                                MsipPath path = MsipPath::Auto);
Points msip_map(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                const MomentCache& cache, MsipPath path = MsipPath::Auto);

struct MsipStepResult {
    Points positions;
    /// Damping actually used (after backtracking).
    double eta = 0.0;
    int shrinks = 0;
    /// Backtracking ran out of shrinks; positions are unchanged.
    bool exhausted = false;
    double fm_before = 0.0;
    double fm_after = 0.0;
};

/// Y <- (1 - eta) Y + eta Psi(Y). In Backtracking mode eta is multiplied by
/// step_shrink until fm does not increase; after max_shrinks the step is
/// abandoned (exhausted = true, Y returned unchanged).
MsipStepResult msip_step_detailed(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                                  const MomentCache& cache, const MsipConfig& config);
Points msip_step(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                 const MomentCache& cache, const MsipConfig& config);

/// |Kbar W Y - vhat1|_F / sqrt(M d) at w = w_hat(Y).
double stationarity_residual(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions);

/// Iterates msip_step. Record k holds the mmd of (Y_k, w_hat(Y_k)); extra
/// columns are fm and the stationarity residual. The final weights are
/// w_hat of the final positions. Errors are rethrown with the iteration index.
Trace run_msip(const Points& initial, const EmpiricalTarget& target, const KernelSpec& spec,
               const MomentCache& cache, const MsipConfig& config);

}  // namespace mmdq
