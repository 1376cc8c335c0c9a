#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmdq/baselines.hpp"
#include "mmdq/config.hpp"
#include "mmdq/dynamics.hpp"
#include "mmdq/msip.hpp"
#include "mmdq/targets.hpp"

namespace mmdq {

enum class Algorithm { WFR, MSIP, Lloyd, IIDMeanShift, MMDGF, DMGD };

std::string to_string(Algorithm algorithm);
/// wfr, msip, lloyd (alias kmeans), iidms, mmdgf, dmgd.
Algorithm parse_algorithm(const std::string& name);

enum class InitStrategy { FromData, UniformBox, GaussianBlob, FromFile };

std::string to_string(InitStrategy strategy);
InitStrategy parse_init(const std::string& name);

struct InitSpec {
    InitStrategy strategy = InitStrategy::UniformBox;
    /// UniformBox corners. When empty, the sample bounding box widened by
    /// `margin` times its extent on each side.
    std::vector<double> lo;
    std::vector<double> hi;
    double margin = 0.2;
    /// GaussianBlob centre (default: target mean) and per-coordinate sd.
    std::vector<double> center;
    double scale = 1.0;
    /// FromFile: point CSV; a `weight` column sets the initial WFR weights.
    std::string path;
};

struct ExperimentConfig {
    TargetSpec target;
    KernelSpec kernel;
    Algorithm algorithm = Algorithm::MSIP;
    Index particles = 3;
    long max_iterations = 100;

    double alpha = 25.0;
    SimulateOptions simulate;
    MsipConfig msip;
    /// Step for iidms (damping), mmdgf and dmgd.
    double step_size = 0.1;
    double noise_beta = 0.05;

    InitSpec init;
    std::vector<std::uint64_t> seeds = {0};
    /// 0 = hardware concurrency.
    unsigned threads = 0;
    /// Monte Carlo pairs for C_pi; 0 = exact.
    long cache_pairs = 0;
    std::string output_dir;

    /// Builds a config from keys; throws ConfigError on bad or unknown keys.
    static ExperimentConfig from(const Config& config);
    void validate() const;
};

/// Default key values, as a Config, for documentation and resolved copies.
Config default_config();

/// Initial positions (and weights) for one seed. Uses the Initialization
/// stream of `seed`.
FlowState initialize(const InitSpec& init, const EmpiricalTarget& target, Index particles, std::uint64_t seed);

struct SeedResult {
    std::uint64_t seed = 0;
    std::optional<Trace> trace;
    std::string error;
};

struct SummaryRow {
    long iteration = 0;
    long seeds = 0;
    double min_mmd = 0.0;
    double median_mmd = 0.0;
    double max_mmd = 0.0;
};

struct ExperimentResult {
    std::vector<SeedResult> runs;
    std::vector<SummaryRow> summary;

    long failures() const;
};

/// Runs a single seed (no files written). Throws on failure.
Trace run_single(const ExperimentConfig& config, const EmpiricalTarget& target, const MomentCache& cache,
                 std::uint64_t seed);

/// Dispatches every seed to a worker pool. Failures are captured per seed.
/// When output_dir is set, writes config.resolved.ini (if `resolved` given),
/// seed_<s>/trace.csv, seed_<s>/final_state.csv, seeds.csv and summary.csv.
ExperimentResult run_experiment(const ExperimentConfig& config, const Config* resolved = nullptr);

/// Per-iteration min / median / max mmd across traces. A trace that stopped
/// early contributes its last value to later iterations.
std::vector<SummaryRow> summarize(const std::vector<const Trace*>& traces);

}  // namespace mmdq
