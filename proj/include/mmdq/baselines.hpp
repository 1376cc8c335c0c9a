#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmdq/embedding.hpp"
#include "mmdq/rng.hpp"
#include "mmdq/trace.hpp"

namespace mmdq {

enum class BaselineAlgorithm { Lloyd, IIDMeanShift, MMDGF, DMGD };

std::string to_string(BaselineAlgorithm algorithm);
/// Accepts lloyd / kmeans, iidms / meanshift, mmdgf, dmgd.
BaselineAlgorithm parse_baseline(const std::string& name);

struct BaselineConfig {
    BaselineAlgorithm algorithm = BaselineAlgorithm::Lloyd;
    /// Damping for IIDMeanShift (1 = plain mean shift), step for MMDGF and DMGD.
    double step_size = 0.1;
    double noise_beta = 0.05;
    long max_iterations = 100;
    /// Seed of the MMDGF noise stream.
    std::uint64_t seed = 0;

    void validate() const;
};

struct LloydStep {
    Points positions;
    /// Particles whose cell has no sample mass.
    long empty_cells = 0;
    /// Within-cell weighted sum of squared distances before the update.
    double distortion = 0.0;
};

/// Each particle moves to the pi-weighted mean of its Voronoi cell; empty
/// cells keep their particle, ties go to the lowest index.
LloydStep lloyd_step_detailed(const EmpiricalTarget& target, const Points& positions);
Points lloyd_step(const EmpiricalTarget& target, const Points& positions);

/// Psi_MS(y) = sum_l pi_l x_l kbar(x_l, y) / sum_l pi_l kbar(x_l, y), evaluated
/// with the largest log kbar factored out.
Point mean_shift_step(const EmpiricalTarget& target, const KernelSpec& spec, PointRef y);
/// Independent damped mean shift of every row: y <- (1 - eta) y + eta Psi_MS(y).
Points mean_shift_all(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions, double eta);

/// y_i <- y_i + eta * transport_i(alpha = 1, w = 1/M) + eps_i,  eps_i ~ N(0, (beta / sqrt(t)) I).
/// Noise for particle i at iteration t comes from rng.split(i).split(t).
Points mmdgf_step(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions, double eta,
                  double noise_beta, long t, const CounterRng& rng);

/// Y <- Y - eta grad F_M(Y).
Points dmgd_step(const EmpiricalTarget& target, const KernelSpec& spec, const Points& positions,
                 const MomentCache& cache, double eta);

/// Runs a baseline from `initial`. Lloyd, IIDMeanShift and MMDGF report mmd
/// with uniform weights 1/M; Lloyd adds columns empty_cells and mmd_optimal
/// (mmd with w_hat of its positions). DMGD reports mmd with w_hat.
Trace run_baseline(const Points& initial, const EmpiricalTarget& target, const KernelSpec& spec,
                   const MomentCache& cache, const BaselineConfig& config);

}  // namespace mmdq
