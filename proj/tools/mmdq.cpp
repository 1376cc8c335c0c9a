#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mmdq/errors.hpp"
#include "mmdq/harness.hpp"
#include "mmdq/io.hpp"
#include "mmdq/plot.hpp"

namespace {

using namespace mmdq;

constexpr int kExitOk = 0;
constexpr int kExitAllFailed = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    std::string seeds;
    long n_seeds = 0;
    long base_seed = 0;
    long threads = -1;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool run_options) {
    cmd->add_option("--config", o.config_path, "INI config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", o.overrides, "override a key, e.g. --set kernel.bandwidth=5 (repeatable)");
    if (run_options) {
        cmd->add_option("--output", o.output, "output directory");
        cmd->add_option("--seeds", o.seeds, "comma-separated seed list");
        cmd->add_option("--n-seeds", o.n_seeds, "number of consecutive seeds");
        cmd->add_option("--base-seed", o.base_seed, "first seed when --n-seeds is given");
        cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    }
}

/// Defaults, then the file, then --set, then dedicated flags.
Config resolve(const CommonOptions& o) {
    Config cfg = default_config();
    if (!o.config_path.empty()) {
        const Config file = Config::load(o.config_path);
        for (const auto& [k, v] : file.values()) {
            cfg.set(k, v);
        }
    }
    for (const auto& s : o.overrides) {
        cfg.apply_override(s);
    }
    if (!o.output.empty()) cfg.set("run.output", o.output);
    if (!o.seeds.empty()) cfg.set("run.seeds", o.seeds);
    if (o.n_seeds > 0) {
        cfg.set("run.n_seeds", std::to_string(o.n_seeds));
        cfg.set("run.base_seed", std::to_string(o.base_seed));
    }
    if (o.threads >= 0) cfg.set("run.threads", std::to_string(o.threads));
    return cfg;
}

int run(const CommonOptions& o, bool single) {
    Config cfg = resolve(o);
    ExperimentConfig e = ExperimentConfig::from(cfg);
    if (single && e.seeds.size() > 1) {
        e.seeds.resize(1);
        cfg.set("run.n_seeds", "0");
        cfg.set("run.seeds", std::to_string(e.seeds.front()));
    }
    const ExperimentResult result = run_experiment(e, &cfg);
    for (const auto& r : result.runs) {
        if (r.trace) {
            std::printf("seed %llu: final mmd %.6g after %zu records (%s)\n", static_cast<unsigned long long>(r.seed),
                        r.trace->records.back().mmd, r.trace->records.size(), r.trace->stop_reason.c_str());
        } else {
            std::printf("seed %llu: FAILED: %s\n", static_cast<unsigned long long>(r.seed), r.error.c_str());
        }
    }
    if (!result.summary.empty()) {
        const auto& last = result.summary.back();
        std::printf("summary: %ld/%zu seeds ok, final mmd min %.6g median %.6g max %.6g\n",
                    static_cast<long>(result.runs.size()) - result.failures(), result.runs.size(), last.min_mmd,
                    last.median_mmd, last.max_mmd);
    }
    if (!e.output_dir.empty()) {
        std::printf("outputs written to %s\n", e.output_dir.c_str());
    }
    return result.failures() == static_cast<long>(result.runs.size()) ? kExitAllFailed : kExitOk;
}

struct TargetAndKernel {
    ExperimentConfig config;
    EmpiricalTarget target;
    MomentCache cache;
};

TargetAndKernel load_target(const CommonOptions& o) {
    ExperimentConfig e = ExperimentConfig::from(resolve(o));
    EmpiricalTarget t = sample(e.target);
    MomentCache c = e.cache_pairs > 0 ? MomentCache::subsampled(t, e.kernel, e.cache_pairs, e.target.seed)
                                      : MomentCache::exact(t, e.kernel);
    return {e, std::move(t), c};
}

int eigbench(const CommonOptions& o, long max_m, const std::string& out_path) {
    const TargetAndKernel tk = load_target(o);
    const auto curve = spectral_curve(tk.target, tk.config.kernel, max_m, tk.cache);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            throw InputError("cannot write " + out_path);
        }
        out = &file;
    }
    *out << "M,benchmark\n";
    for (std::size_t k = 0; k < curve.size(); ++k) {
        *out << (k + 1) << ',' << format_double(curve[k]) << '\n';
    }
    return kExitOk;
}

int mmd_command(const CommonOptions& o, const std::string& points_path) {
    const TargetAndKernel tk = load_target(o);
    bool weighted = false;
    WeightedQuantization q = read_points_csv(points_path, &weighted);
    if (q.positions.cols() != tk.target.dim()) {
        throw InputError("points have dimension " + std::to_string(q.positions.cols()) + ", target has " +
                         std::to_string(tk.target.dim()));
    }
    const Index m = q.positions.rows();
    std::cout << "weights,mmd\n";
    WeightedQuantization uniform{q.positions, Vector::Constant(m, 1.0 / static_cast<double>(m))};
    std::cout << "uniform," << format_double(mmd(tk.target, tk.config.kernel, uniform, tk.cache)) << '\n';
    if (weighted) {
        std::cout << "file," << format_double(mmd(tk.target, tk.config.kernel, q, tk.cache)) << '\n';
    }
    try {
        WeightedQuantization opt{q.positions, optimal_weights(tk.target, tk.config.kernel, q.positions)};
        std::cout << "optimal," << format_double(mmd(tk.target, tk.config.kernel, opt, tk.cache)) << '\n';
    } catch (const SingularKernelMatrix& e) {
        std::cout << "optimal,nan\n";
        std::cerr << "optimal weights unavailable: " << e.what() << '\n';
    }
    return kExitOk;
}

int plot_command(const std::string& kind, const std::vector<std::string>& inputs, const std::string& target_path,
                 const std::string& output) {
    std::vector<Trace> traces;
    PlotKind k;
    if (kind == "mmd") {
        k = PlotKind::MmdCurve;
        for (const auto& p : inputs) {
            traces.push_back(read_trace_csv(p));
        }
    } else if (kind == "scatter") {
        k = PlotKind::Scatter2d;
        for (const auto& p : inputs) {
            Trace t;
            t.final_state = read_final_state_csv(p);
            traces.push_back(std::move(t));
        }
    } else {
        throw ConfigError("--kind must be mmd or scatter");
    }
    if (target_path.empty()) {
        emit_plot(traces, k, output);
    } else {
        const EmpiricalTarget target = read_target_csv(target_path);
        emit_plot(traces, k, output, &target);
    }
    std::printf("wrote %s\n", output.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted quantization of empirical measures by MMD minimization"};
    app.require_subcommand(1);

    CommonOptions quantize_opts;
    auto* quantize = app.add_subcommand("quantize", "run one seed of the configured algorithm");
    add_common(quantize, quantize_opts, true);

    CommonOptions bench_opts;
    auto* benchmark = app.add_subcommand("benchmark", "run a seed sweep and write a summary");
    add_common(benchmark, bench_opts, true);

    CommonOptions eig_opts;
    long max_m = 20;
    std::string eig_out;
    auto* eig = app.add_subcommand("eigbench", "spectral benchmark curve over M");
    add_common(eig, eig_opts, false);
    eig->add_option("--max-m", max_m, "largest M")->check(CLI::PositiveNumber);
    eig->add_option("--output", eig_out, "CSV file (default stdout)");

    CommonOptions mmd_opts;
    std::string points;
    auto* mmd_cmd = app.add_subcommand("mmd", "MMD of an external point set against the configured target");
    add_common(mmd_cmd, mmd_opts, false);
    mmd_cmd->add_option("--points", points, "point CSV (optional final `weight` column)")
        ->required()
        ->check(CLI::ExistingFile);

    std::string plot_kind = "mmd";
    std::vector<std::string> plot_inputs;
    std::string plot_target;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "SVG of trace curves or final configurations");
    plot->add_option("--kind", plot_kind, "mmd or scatter");
    plot->add_option("--input", plot_inputs, "trace.csv (mmd) or final_state.csv (scatter) files")
        ->required()
        ->check(CLI::ExistingFile);
    plot->add_option("--target", plot_target, "target sample CSV drawn under a scatter")->check(CLI::ExistingFile);
    plot->add_option("--output", plot_out, "SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*quantize) return run(quantize_opts, true);
        if (*benchmark) return run(bench_opts, false);
        if (*eig) return eigbench(eig_opts, max_m, eig_out);
        if (*mmd_cmd) return mmd_command(mmd_opts, points);
        if (*plot) return plot_command(plot_kind, plot_inputs, plot_target, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAllFailed;
    }
    return kExitOk;
}
