#include "mmdq/targets.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mmdq/errors.hpp"
#include "mmdq/io.hpp"

namespace mmdq {

namespace {

Point pt(std::initializer_list<double> v) {
    Point p(static_cast<Index>(v.size()));
    Index k = 0;
    for (double x : v) {
        p[k++] = x;
    }
    return p;
}

Matrix cov2(double a, double b, double c) {
    Matrix m(2, 2);
    m << a, b, b, c;
    return m;
}

bool on_simplex(const std::vector<double>& w) {
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0)) {
            return false;
        }
        sum += x;
    }
    return std::abs(sum - 1.0) <= 1e-12;
}

TargetSpec gmm2() {
    TargetSpec s;
    s.family = TargetFamily::GMM;
    s.name = "gmm2";
    s.components = {
        {pt({-4.0, -2.0}), 1.5 * cov2(3.0, 1.2, 1.0), 0.40},
        {pt({4.0, -3.0}), 1.5 * cov2(1.0, -0.6, 2.0), 0.35},
        {pt({0.0, 4.0}), 1.5 * cov2(2.5, 0.0, 0.6), 0.25},
    };
    return s;
}

/// Five components in R^d, parameters drawn from a fixed internal stream, then
/// every coordinate rescaled so the mixture has unit marginal variance.
TargetSpec gmm_high(Index d) {
    if (d < 1) {
        throw InputError("gmm100: dimension must be >= 1");
    }
    TargetSpec s;
    s.family = TargetFamily::GMM;
    s.name = "gmm100";
    CounterRng rng(0x6d6d64715f676d6dULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.3, 1.0);
    const std::vector<double> weights = {0.3, 0.25, 0.2, 0.15, 0.1};
    for (double w : weights) {
        GaussianComponent c;
        c.weight = w;
        c.mean = Point(d);
        for (Index k = 0; k < d; ++k) {
            c.mean[k] = 3.0 * normal(rng);
        }
        Matrix a(d, d);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                a(i, j) = normal(rng) / std::sqrt(static_cast<double>(d));
            }
        }
        Vector diag(d);
        for (Index k = 0; k < d; ++k) {
            diag[k] = unif(rng);
        }
        c.covariance = 0.5 * a * a.transpose();
        c.covariance.diagonal() += diag;
        s.components.push_back(std::move(c));
    }
    Point mean = Point::Zero(d);
    Point second = Point::Zero(d);
    for (const auto& c : s.components) {
        mean += c.weight * c.mean;
        second += c.weight * (c.covariance.diagonal().transpose() + c.mean.cwiseProduct(c.mean));
    }
    const Point sd = (second - mean.cwiseProduct(mean)).cwiseSqrt();
    const Vector inv = sd.cwiseInverse().transpose();
    for (auto& c : s.components) {
        c.mean = c.mean.cwiseProduct(inv.transpose());
        c.covariance = inv.asDiagonal() * c.covariance * inv.asDiagonal();
    }
    return s;
}

TargetSpec rings() {
    TargetSpec s;
    s.family = TargetFamily::Rings;
    s.name = "rings";
    s.rings = {{pt({0.0, 0.0}), 1.0, 0.5}, {pt({2.2, 0.4}), 0.5, 0.2}, {pt({0.8, 2.3}), 0.75, 0.3}};
    return s;
}

TargetSpec checkers() {
    TargetSpec s;
    s.family = TargetFamily::Checkers;
    s.name = "checkers";
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if ((i + j) % 2 == 0) {
                s.anchors.push_back(pt({i - 2.0, j - 2.0}));
            }
        }
    }
    return s;
}

TargetSpec funnel() {
    TargetSpec s;
    s.family = TargetFamily::Funnel;
    s.name = "funnel";
    return s;
}

TargetSpec joker() {
    TargetSpec s;
    s.family = TargetFamily::Joker;
    s.name = "joker";
    s.components = {
        {pt({0.98, 0.68}), cov2(0.010, 0.004, 0.008), 0.2},
        {pt({-0.6, 0.3}), cov2(0.15, -0.05, 0.06), 0.45},
        {pt({0.2, -0.7}), cov2(0.05, 0.0, 0.20), 0.35},
    };
    return s;
}

Points sample_gmm(const std::vector<GaussianComponent>& comps, long n, CounterRng& rng) {
    const Index d = comps.front().mean.size();
    std::vector<double> w;
    std::vector<Matrix> chol;
    for (const auto& c : comps) {
        w.push_back(c.weight);
        Eigen::LLT<Matrix> llt(c.covariance);
        chol.push_back(llt.matrixL());
    }
    std::discrete_distribution<int> pick(w.begin(), w.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    Points out(n, d);
    Vector z(d);
    for (long i = 0; i < n; ++i) {
        const int c = pick(rng);
        for (Index k = 0; k < d; ++k) {
            z[k] = normal(rng);
        }
        out.row(i) = comps[static_cast<std::size_t>(c)].mean + (chol[static_cast<std::size_t>(c)] * z).transpose();
    }
    return out;
}

}  // namespace

Index TargetSpec::dim() const {
    switch (family) {
        case TargetFamily::GMM:
        case TargetFamily::Joker:
            return components.empty() ? 0 : components.front().mean.size();
        case TargetFamily::FromFile:
            return 0;
        default:
            return 2;
    }
}

void TargetSpec::validate() const {
    if (family != TargetFamily::FromFile && n_samples < 1) {
        throw InputError("target: n_samples must be >= 1");
    }
    std::vector<double> w;
    switch (family) {
        case TargetFamily::GMM:
        case TargetFamily::Joker: {
            if (components.empty()) {
                throw InputError("target: mixture has no components");
            }
            const Index d = components.front().mean.size();
            for (const auto& c : components) {
                if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
                    throw InputError("target: inconsistent component dimensions");
                }
                if (!c.covariance.isApprox(c.covariance.transpose(), 1e-12)) {
                    throw InputError("target: covariance is not symmetric");
                }
                Eigen::LLT<Matrix> llt(c.covariance);
                if (llt.info() != Eigen::Success) {
                    throw InputError("target: covariance is not positive definite");
                }
                w.push_back(c.weight);
            }
            break;
        }
        case TargetFamily::Rings:
            if (rings.empty()) {
                throw InputError("target: no rings");
            }
            for (const auto& r : rings) {
                if (r.center.size() != 2 || !(r.radius > 0.0)) {
                    throw InputError("target: ring needs a 2-d centre and positive radius");
                }
                w.push_back(r.weight);
            }
            break;
        case TargetFamily::Checkers:
            if (anchors.empty()) {
                throw InputError("target: no checkers anchors");
            }
            for (const auto& a : anchors) {
                if (a.size() != 2) {
                    throw InputError("target: checkers anchors must be 2-d");
                }
            }
            return;
        case TargetFamily::Funnel:
            return;
        case TargetFamily::FromFile:
            if (path.empty()) {
                throw InputError("target: file path missing");
            }
            return;
    }
    if (!on_simplex(w)) {
        throw InputError("target: mixture weights must be nonnegative and sum to 1");
    }
}

TargetSpec preset(const std::string& name, Index dim) {
    if (name == "gmm2") return gmm2();
    if (name == "gmm100") return gmm_high(dim > 0 ? dim : 100);
    if (name == "rings") return rings();
    if (name == "checkers") return checkers();
    if (name == "funnel") return funnel();
    if (name == "joker") return joker();
    throw InputError("unknown target preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"gmm2", "gmm100", "rings", "checkers", "funnel", "joker"}; }

EmpiricalTarget sample(const TargetSpec& spec, CounterRng& rng) {
    spec.validate();
    const long n = spec.n_samples;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (spec.family) {
        case TargetFamily::GMM:
        case TargetFamily::Joker:
            return EmpiricalTarget(sample_gmm(spec.components, n, rng));
        case TargetFamily::Rings: {
            std::vector<double> w;
            for (const auto& r : spec.rings) {
                w.push_back(r.weight);
            }
            std::discrete_distribution<int> pick(w.begin(), w.end());
            Points out(n, 2);
            for (long i = 0; i < n; ++i) {
                const Ring& r = spec.rings[static_cast<std::size_t>(pick(rng))];
                const double rad = r.radius * (1.0 + 0.05 * normal(rng));
                const double t = 2.0 * std::numbers::pi * unif(rng);
                out(i, 0) = r.center[0] + rad * std::cos(t);
                out(i, 1) = r.center[1] + rad * std::sin(t);
            }
            return EmpiricalTarget(std::move(out));
        }
        case TargetFamily::Checkers: {
            std::uniform_int_distribution<std::size_t> pick(0, spec.anchors.size() - 1);
            Points out(n, 2);
            for (long i = 0; i < n; ++i) {
                const Point& a = spec.anchors[pick(rng)];
                out(i, 0) = a[0] + unif(rng);
                out(i, 1) = a[1] + unif(rng);
            }
            return EmpiricalTarget(std::move(out));
        }
        case TargetFamily::Funnel: {
            Points out(n, 2);
            for (long i = 0; i < n; ++i) {
                const double x1 = normal(rng);
                out(i, 0) = x1;
                out(i, 1) = std::exp(0.5 * x1) * normal(rng);
            }
            return EmpiricalTarget(std::move(out));
        }
        case TargetFamily::FromFile:
            return read_target_csv(spec.path);
    }
    throw InputError("target: unknown family");
}

EmpiricalTarget sample(const TargetSpec& spec) {
    CounterRng rng = make_stream(spec.seed, Stream::Sampling);
    return sample(spec, rng);
}

Vector operator_spectrum(const EmpiricalTarget& target, const KernelSpec& spec) {
    const Vector root = target.weights().cwiseSqrt();
    Matrix a = kernel_matrix(spec, target.samples());
    a = root.asDiagonal() * a * root.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericError("spectral benchmark: eigensolver failed");
    }
    return eig.eigenvalues().reverse();
}

std::vector<double> spectral_curve(const EmpiricalTarget& target, const KernelSpec& spec, Index max_m,
                                   const MomentCache& cache) {
    if (max_m < 1) {
        throw InputError("spectral benchmark: M must be >= 1");
    }
    if (!(cache.c_pi > 0.0)) {
        throw NumericError("spectral benchmark: C_pi must be positive");
    }
    const Vector lambda = operator_spectrum(target, spec);
    std::vector<double> out;
    for (Index m = 1; m <= max_m; ++m) {
        const double l = m < lambda.size() ? std::max(0.0, lambda[m]) : 0.0;
        out.push_back(std::sqrt(l) / std::sqrt(cache.c_pi));
    }
    return out;
}

double spectral_benchmark(const EmpiricalTarget& target, const KernelSpec& spec, Index m, const MomentCache& cache) {
    return spectral_curve(target, spec, m, cache).back();
}

}  // namespace mmdq
