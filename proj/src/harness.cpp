#include "mmdq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "mmdq/errors.hpp"
#include "mmdq/io.hpp"

namespace mmdq {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) {
            continue;
        }
        const auto e = item.find_last_not_of(" \t");
        const std::string s = item.substr(b, e - b + 1);
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.front() == '-') {
            throw ConfigError("run.seeds: '" + s + "' is not a nonnegative integer");
        }
        out.push_back(v);
    }
    return out;
}

Point to_point(const std::vector<double>& v) {
    Point p(static_cast<Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        p[static_cast<Index>(k)] = v[k];
    }
    return p;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::WFR: return "wfr";
        case Algorithm::MSIP: return "msip";
        case Algorithm::Lloyd: return "lloyd";
        case Algorithm::IIDMeanShift: return "iidms";
        case Algorithm::MMDGF: return "mmdgf";
        case Algorithm::DMGD: return "dmgd";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "wfr") return Algorithm::WFR;
    if (name == "msip") return Algorithm::MSIP;
    if (name == "lloyd" || name == "kmeans") return Algorithm::Lloyd;
    if (name == "iidms" || name == "meanshift") return Algorithm::IIDMeanShift;
    if (name == "mmdgf") return Algorithm::MMDGF;
    if (name == "dmgd") return Algorithm::DMGD;
    throw ConfigError("unknown algorithm '" + name + "' (wfr, msip, lloyd, kmeans, iidms, mmdgf, dmgd)");
}

std::string to_string(InitStrategy strategy) {
    switch (strategy) {
        case InitStrategy::FromData: return "from_data";
        case InitStrategy::UniformBox: return "uniform_box";
        case InitStrategy::GaussianBlob: return "gaussian_blob";
        case InitStrategy::FromFile: return "from_file";
    }
    return "?";
}

InitStrategy parse_init(const std::string& name) {
    if (name == "from_data") return InitStrategy::FromData;
    if (name == "uniform_box") return InitStrategy::UniformBox;
    if (name == "gaussian_blob") return InitStrategy::GaussianBlob;
    if (name == "from_file") return InitStrategy::FromFile;
    throw ConfigError("unknown init strategy '" + name + "' (from_data, uniform_box, gaussian_blob, from_file)");
}

Config default_config() {
    Config c;
    c.set("target.preset", "gmm2");
    c.set("target.file", "");
    c.set("target.n_samples", "1000");
    c.set("target.seed", "0");
    c.set("target.dim", "0");
    c.set("kernel.family", "se");
    c.set("kernel.bandwidth", "1");
    c.set("kernel.imq_offset", "1");
    c.set("algorithm.name", "msip");
    c.set("algorithm.particles", "3");
    c.set("algorithm.max_iterations", "100");
    c.set("wfr.alpha", "25");
    c.set("wfr.solver", "rk23");
    c.set("wfr.step", "0.01");
    c.set("wfr.rtol", "1e-6");
    c.set("wfr.atol", "1e-9");
    c.set("wfr.max_time", "inf");
    c.set("msip.eta", "0.8");
    c.set("msip.stationarity_tol", "1e-8");
    c.set("msip.descent", "fixed");
    c.set("msip.step_shrink", "0.5");
    c.set("msip.max_shrinks", "30");
    c.set("msip.path", "auto");
    c.set("baseline.step_size", "");
    c.set("baseline.noise_beta", "0.05");
    c.set("init.strategy", "uniform_box");
    c.set("init.lo", "");
    c.set("init.hi", "");
    c.set("init.margin", "0.2");
    c.set("init.center", "");
    c.set("init.scale", "1");
    c.set("init.file", "");
    c.set("run.seeds", "0");
    c.set("run.n_seeds", "0");
    c.set("run.base_seed", "0");
    c.set("run.threads", "0");
    c.set("run.output", "");
    c.set("cache.pairs", "0");
    return c;
}

ExperimentConfig ExperimentConfig::from(const Config& cfg) {
    ExperimentConfig e;
    try {
        const std::string file = cfg.get("target.file", "");
        const std::string preset_name = cfg.get("target.preset", "gmm2");
        const long dim = cfg.get_long("target.dim", 0);
        if (!file.empty()) {
            e.target.family = TargetFamily::FromFile;
            e.target.name = file;
            e.target.path = file;
        } else {
            e.target = preset(preset_name, static_cast<Index>(dim));
        }
        e.target.n_samples = cfg.get_long("target.n_samples", 1000);
        e.target.seed = static_cast<std::uint64_t>(cfg.get_long("target.seed", 0));

        e.kernel.family = parse_kernel_family(cfg.get("kernel.family", "se"));
        e.kernel.bandwidth = cfg.get_double("kernel.bandwidth", 1.0);
        e.kernel.imq_offset = cfg.get_double("kernel.imq_offset", 1.0);

        e.algorithm = parse_algorithm(cfg.get("algorithm.name", "msip"));
        e.particles = cfg.get_long("algorithm.particles", 3);
        e.max_iterations = cfg.get_long("algorithm.max_iterations", 100);

        e.alpha = cfg.get_double("wfr.alpha", 25.0);
        e.simulate.solver = parse_solver(cfg.get("wfr.solver", "rk23"));
        e.simulate.step = cfg.get_double("wfr.step", 0.01);
        e.simulate.rtol = cfg.get_double("wfr.rtol", 1e-6);
        e.simulate.atol = cfg.get_double("wfr.atol", 1e-9);
        e.simulate.max_time = cfg.get_double("wfr.max_time", std::numeric_limits<double>::infinity());

        e.msip.eta = cfg.get_double("msip.eta", 0.8);
        e.msip.stationarity_tol = cfg.get_double("msip.stationarity_tol", 1e-8);
        const std::string descent = cfg.get("msip.descent", "fixed");
        if (descent == "fixed") {
            e.msip.descent_mode = DescentMode::FixedEta;
        } else if (descent == "backtracking") {
            e.msip.descent_mode = DescentMode::Backtracking;
        } else {
            throw ConfigError("msip.descent must be fixed or backtracking");
        }
        e.msip.step_shrink = cfg.get_double("msip.step_shrink", 0.5);
        e.msip.max_shrinks = static_cast<int>(cfg.get_long("msip.max_shrinks", 30));
        const std::string path = cfg.get("msip.path", "auto");
        if (path == "auto") {
            e.msip.path = MsipPath::Auto;
        } else if (path == "general") {
            e.msip.path = MsipPath::General;
        } else if (path == "fast") {
            e.msip.path = MsipPath::Fast;
        } else {
            throw ConfigError("msip.path must be auto, general or fast");
        }

        const std::string step = cfg.get("baseline.step_size", "");
        e.step_size = step.empty() ? (e.algorithm == Algorithm::IIDMeanShift ? 1.0 : 0.1)
                                   : cfg.get_double("baseline.step_size", 0.1);
        e.noise_beta = cfg.get_double("baseline.noise_beta", 0.05);

        e.init.strategy = parse_init(cfg.get("init.strategy", "uniform_box"));
        e.init.lo = cfg.get_doubles("init.lo");
        e.init.hi = cfg.get_doubles("init.hi");
        e.init.margin = cfg.get_double("init.margin", 0.2);
        e.init.center = cfg.get_doubles("init.center");
        e.init.scale = cfg.get_double("init.scale", 1.0);
        e.init.path = cfg.get("init.file", "");

        const long n_seeds = cfg.get_long("run.n_seeds", 0);
        const long base = cfg.get_long("run.base_seed", 0);
        const std::string seed_list = cfg.get("run.seeds", "0");
        if (n_seeds > 0) {
            e.seeds.clear();
            for (long k = 0; k < n_seeds; ++k) {
                e.seeds.push_back(static_cast<std::uint64_t>(base + k));
            }
        } else {
            e.seeds = parse_seed_list(seed_list);
        }
        const long threads = cfg.get_long("run.threads", 0);
        if (threads < 0) {
            throw ConfigError("run.threads must be nonnegative");
        }
        e.threads = static_cast<unsigned>(threads);
        e.output_dir = cfg.get("run.output", "");
        e.cache_pairs = cfg.get_long("cache.pairs", 0);
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& err) {
        throw ConfigError(err.what());
    }
    const auto unknown = cfg.unused_keys();
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) {
            list += (list.empty() ? "" : ", ") + k;
        }
        throw ConfigError("unknown config keys: " + list);
    }
    e.validate();
    return e;
}

void ExperimentConfig::validate() const {
    try {
        kernel.validate();
        target.validate();
        msip.validate();
    } catch (const InputError& err) {
        throw ConfigError(err.what());
    }
    if (particles < 1) {
        throw ConfigError("algorithm.particles must be >= 1");
    }
    if (max_iterations < 0) {
        throw ConfigError("algorithm.max_iterations must be nonnegative");
    }
    if (!(alpha > 0.0)) {
        throw ConfigError("wfr.alpha must be positive");
    }
    if (!(step_size > 0.0)) {
        throw ConfigError("baseline.step_size must be positive");
    }
    if (!(noise_beta >= 0.0)) {
        throw ConfigError("baseline.noise_beta must be nonnegative");
    }
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (cache_pairs < 0) {
        throw ConfigError("cache.pairs must be nonnegative");
    }
    if (init.lo.size() != init.hi.size()) {
        throw ConfigError("init.lo and init.hi must have the same length");
    }
    if (!(init.margin >= 0.0) || !(init.scale > 0.0)) {
        throw ConfigError("init.margin must be >= 0 and init.scale > 0");
    }
    if (init.strategy == InitStrategy::FromFile && init.path.empty()) {
        throw ConfigError("init.file is required for from_file");
    }
}

FlowState initialize(const InitSpec& init, const EmpiricalTarget& target, Index particles, std::uint64_t seed) {
    CounterRng rng = make_stream(seed, Stream::Initialization);
    const Index d = target.dim();
    FlowState s;
    s.weights = Vector::Constant(particles, 1.0 / static_cast<double>(particles));
    switch (init.strategy) {
        case InitStrategy::FromData: {
            std::vector<Index> pool;
            for (Index l = 0; l < target.size(); ++l) {
                if (target.weights()[l] > 0.0) {
                    pool.push_back(l);
                }
            }
            if (static_cast<Index>(pool.size()) < particles) {
                throw InputError("from_data: " + std::to_string(particles) + " particles but only " +
                                 std::to_string(pool.size()) + " atoms");
            }
            s.positions.resize(particles, d);
            // Partial Fisher-Yates: the first `particles` slots are a uniform draw without replacement.
            for (Index i = 0; i < particles; ++i) {
                std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
                std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
                s.positions.row(i) = target.samples().row(pool[static_cast<std::size_t>(i)]);
            }
            break;
        }
        case InitStrategy::UniformBox: {
            Point lo;
            Point hi;
            if (init.lo.empty()) {
                lo = target.lower();
                hi = target.upper();
                const Point extent = hi - lo;
                lo -= init.margin * extent;
                hi += init.margin * extent;
            } else {
                if (static_cast<Index>(init.lo.size()) != d) {
                    throw InputError("uniform_box: box dimension does not match target");
                }
                lo = to_point(init.lo);
                hi = to_point(init.hi);
            }
            if ((hi.array() < lo.array()).any()) {
                throw InputError("uniform_box: hi must be >= lo");
            }
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            s.positions.resize(particles, d);
            for (Index i = 0; i < particles; ++i) {
                for (Index k = 0; k < d; ++k) {
                    s.positions(i, k) = lo[k] + (hi[k] - lo[k]) * unif(rng);
                }
            }
            break;
        }
        case InitStrategy::GaussianBlob: {
            Point c;
            if (init.center.empty()) {
                c = target.weights().transpose() * target.samples();
            } else {
                if (static_cast<Index>(init.center.size()) != d) {
                    throw InputError("gaussian_blob: centre dimension does not match target");
                }
                c = to_point(init.center);
            }
            std::normal_distribution<double> normal(0.0, init.scale);
            s.positions.resize(particles, d);
            for (Index i = 0; i < particles; ++i) {
                for (Index k = 0; k < d; ++k) {
                    s.positions(i, k) = c[k] + normal(rng);
                }
            }
            break;
        }
        case InitStrategy::FromFile: {
            bool weighted = false;
            WeightedQuantization q = read_points_csv(init.path, &weighted);
            if (q.positions.cols() != d) {
                throw InputError("from_file: point dimension does not match target");
            }
            if (q.positions.rows() != particles) {
                throw InputError("from_file: file has " + std::to_string(q.positions.rows()) +
                                 " points, config asks for " + std::to_string(particles));
            }
            s.positions = std::move(q.positions);
            if (weighted) {
                s.weights = std::move(q.weights);
            }
            break;
        }
    }
    return s;
}

long ExperimentResult::failures() const {
    return std::count_if(runs.begin(), runs.end(), [](const SeedResult& r) { return !r.trace.has_value(); });
}

Trace run_single(const ExperimentConfig& config, const EmpiricalTarget& target, const MomentCache& cache,
                 std::uint64_t seed) {
    const FlowState init = initialize(config.init, target, config.particles, seed);
    switch (config.algorithm) {
        case Algorithm::WFR: {
            SimulateOptions opt = config.simulate;
            opt.max_iterations = config.max_iterations;
            return simulate(init, target, config.kernel, cache, config.alpha, opt);
        }
        case Algorithm::MSIP: {
            MsipConfig mc = config.msip;
            mc.max_iterations = config.max_iterations;
            return run_msip(init.positions, target, config.kernel, cache, mc);
        }
        default: {
            BaselineConfig bc;
            bc.algorithm = config.algorithm == Algorithm::Lloyd          ? BaselineAlgorithm::Lloyd
                           : config.algorithm == Algorithm::IIDMeanShift ? BaselineAlgorithm::IIDMeanShift
                           : config.algorithm == Algorithm::MMDGF        ? BaselineAlgorithm::MMDGF
                                                                         : BaselineAlgorithm::DMGD;
            bc.step_size = config.step_size;
            bc.noise_beta = config.noise_beta;
            bc.max_iterations = config.max_iterations;
            bc.seed = seed;
            return run_baseline(init.positions, target, config.kernel, cache, bc);
        }
    }
}

std::vector<SummaryRow> summarize(const std::vector<const Trace*>& traces) {
    std::vector<long> iterations;
    for (const Trace* t : traces) {
        for (const auto& r : t->records) {
            iterations.push_back(r.iteration);
        }
    }
    std::sort(iterations.begin(), iterations.end());
    iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());
    std::vector<std::size_t> cursor(traces.size(), 0);
    std::vector<SummaryRow> out;
    for (long it : iterations) {
        std::vector<double> values;
        for (std::size_t k = 0; k < traces.size(); ++k) {
            const auto& recs = traces[k]->records;
            while (cursor[k] + 1 < recs.size() && recs[cursor[k] + 1].iteration <= it) {
                ++cursor[k];
            }
            if (!recs.empty() && recs[cursor[k]].iteration <= it) {
                values.push_back(recs[cursor[k]].mmd);
            }
        }
        if (values.empty()) {
            continue;
        }
        SummaryRow row;
        row.iteration = it;
        row.seeds = static_cast<long>(values.size());
        row.min_mmd = *std::min_element(values.begin(), values.end());
        row.max_mmd = *std::max_element(values.begin(), values.end());
        row.median_mmd = median_of(values);
        out.push_back(row);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Config* resolved) {
    config.validate();
    const EmpiricalTarget target = sample(config.target);
    if (target.dim() < 1) {
        throw InputError("target has no coordinates");
    }
    const MomentCache cache = config.cache_pairs > 0
                                  ? MomentCache::subsampled(target, config.kernel, config.cache_pairs, config.target.seed)
                                  : MomentCache::exact(target, config.kernel);

    ExperimentResult result;
    result.runs.resize(config.seeds.size());
    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(config.seeds.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < config.seeds.size(); k = next++) {
            SeedResult& r = result.runs[k];
            r.seed = config.seeds[k];
            try {
                r.trace = run_single(config, target, cache, r.seed);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    std::vector<const Trace*> ok;
    for (const auto& r : result.runs) {
        if (r.trace) {
            ok.push_back(&*r.trace);
        }
    }
    result.summary = summarize(ok);

    if (!config.output_dir.empty()) {
        const fs::path root(config.output_dir);
        fs::create_directories(root);
        if (resolved) {
            std::ofstream(root / "config.resolved.ini") << resolved->dump();
        }
        std::ofstream seeds(root / "seeds.csv");
        seeds << "seed,status,final_mmd,records,stop_reason,warnings,error\n";
        for (const auto& r : result.runs) {
            const fs::path dir = root / ("seed_" + std::to_string(r.seed));
            fs::create_directories(dir);
            if (r.trace) {
                write_trace_csv((dir / "trace.csv").string(), *r.trace);
                write_final_state_csv((dir / "final_state.csv").string(), r.trace->final_state);
                if (!r.trace->warnings.empty()) {
                    std::ofstream w(dir / "warnings.txt");
                    for (const auto& line : r.trace->warnings) {
                        w << line << '\n';
                    }
                }
                seeds << r.seed << ",ok," << format_double(r.trace->records.back().mmd) << ','
                      << r.trace->records.size() << ',' << r.trace->stop_reason << ',' << r.trace->warnings.size()
                      << ",\n";
            } else {
                std::ofstream(dir / "error.txt") << r.error << '\n';
                std::string clean = r.error;
                std::replace(clean.begin(), clean.end(), ',', ';');
                std::replace(clean.begin(), clean.end(), '\n', ' ');
                seeds << r.seed << ",failed,,0,,0," << clean << '\n';
            }
        }
        std::ofstream summary(root / "summary.csv");
        summary << "iteration,seeds,min_mmd,median_mmd,max_mmd\n";
        for (const auto& row : result.summary) {
            summary << row.iteration << ',' << row.seeds << ',' << format_double(row.min_mmd) << ','
                    << format_double(row.median_mmd) << ',' << format_double(row.max_mmd) << '\n';
        }
    }
    return result;
}

}  // namespace mmdq
