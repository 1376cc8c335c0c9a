#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmdq/embedding.hpp"
#include "mmdq/rng.hpp"

namespace mmdq {

enum class TargetFamily { GMM, Rings, Checkers, Funnel, Joker, FromFile };

struct GaussianComponent {
    Point mean;
    Matrix covariance;
    double weight = 1.0;
};

/// Ring j: centre + r (cos t, sin t), r ~ radius * N(1, 0.05^2), t ~ U(0, 2 pi).
struct Ring {
    Point center;
    double radius = 1.0;
    double weight = 1.0;
};

struct TargetSpec {
    TargetFamily family = TargetFamily::GMM;
    std::string name;
    /// GMM and Joker.
    std::vector<GaussianComponent> components;
    std::vector<Ring> rings;
    /// Checkers: lower-left corners of the unit squares, chosen uniformly.
    std::vector<Point> anchors;
    long n_samples = 1000;
    std::uint64_t seed = 0;
    /// FromFile.
    std::string path;

    Index dim() const;
    /// Throws InputError: empty mixture, weights off the simplex, covariance not SPD.
    void validate() const;
};

/// Version of the preset table below; bump when any preset number changes.
inline constexpr int kPresetVersion = 1;

/// gmm2, gmm100, rings, checkers, funnel, joker. `dim` only applies to gmm100
/// (default 100); other presets ignore it.
TargetSpec preset(const std::string& name, Index dim = 0);
std::vector<std::string> preset_names();

/// Draws spec.n_samples points (uniform sample weights). Deterministic in rng.
EmpiricalTarget sample(const TargetSpec& spec, CounterRng& rng);
/// Uses the Sampling stream of spec.seed; FromFile reads spec.path.
EmpiricalTarget sample(const TargetSpec& spec);

/// sqrt(lambda_{M+1}) / sqrt(C_pi) with lambda the descending eigenvalues of
/// P^(1/2) K_N P^(1/2), P = diag(pi) (so (1/N) K_N for uniform pi). 0 when M >= N.
double spectral_benchmark(const EmpiricalTarget& target, const KernelSpec& spec, Index m, const MomentCache& cache);
/// Benchmark values for M = 1..max_m from a single eigendecomposition.
std::vector<double> spectral_curve(const EmpiricalTarget& target, const KernelSpec& spec, Index max_m,
                                   const MomentCache& cache);
/// Descending spectrum used by the benchmark.
Vector operator_spectrum(const EmpiricalTarget& target, const KernelSpec& spec);

}  // namespace mmdq
