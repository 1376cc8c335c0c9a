#pragma once

#include <cmath>
#include <random>

#include "mmdq/embedding.hpp"
#include "mmdq/kernel.hpp"

namespace testsupport {

using mmdq::Index;
using mmdq::KernelFamily;
using mmdq::KernelSpec;
using mmdq::Matrix;
using mmdq::Point;
using mmdq::Points;
using mmdq::Vector;

inline Points random_points(std::mt19937_64& rng, Index n, Index d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Points p(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < d; ++k) {
            p(i, k) = normal(rng);
        }
    }
    return p;
}

/// Random points with every pair at least `min_dist` apart.
inline Points separated_points(std::mt19937_64& rng, Index n, Index d, double scale, double min_dist) {
    std::normal_distribution<double> normal(0.0, scale);
    Points p(n, d);
    Index filled = 0;
    while (filled < n) {
        Point c(d);
        for (Index k = 0; k < d; ++k) {
            c[k] = normal(rng);
        }
        bool ok = true;
        for (Index j = 0; j < filled; ++j) {
            ok = ok && (p.row(j) - c).norm() >= min_dist;
        }
        if (ok) {
            p.row(filled++) = c;
        }
    }
    return p;
}

inline Points rows(std::initializer_list<std::initializer_list<double>> data) {
    const Index n = static_cast<Index>(data.size());
    const Index d = static_cast<Index>(data.begin()->size());
    Points p(n, d);
    Index i = 0;
    for (const auto& r : data) {
        Index k = 0;
        for (double v : r) {
            p(i, k++) = v;
        }
        ++i;
    }
    return p;
}

// Kernel formulas written out independently of the library.
inline double naive_kernel(const KernelSpec& s, const Point& x, const Point& y) {
    double r2 = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
        r2 += (x[k] - y[k]) * (x[k] - y[k]);
    }
    const double h = s.bandwidth;
    switch (s.family) {
        case KernelFamily::SquaredExponential:
            return std::exp(-r2 / (h * h));
        case KernelFamily::InverseMultiquadric:
            return std::pow(s.imq_offset * s.imq_offset + r2 / (h * h), -0.5);
        case KernelFamily::Matern32: {
            const double a = std::sqrt(3.0 * r2) / h;
            return (1.0 + a) * std::exp(-a);
        }
    }
    return 0.0;
}

inline double naive_companion(const KernelSpec& s, const Point& x, const Point& y) {
    double r2 = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
        r2 += (x[k] - y[k]) * (x[k] - y[k]);
    }
    const double h = s.bandwidth;
    switch (s.family) {
        case KernelFamily::SquaredExponential:
            return 2.0 / (h * h) * std::exp(-r2 / (h * h));
        case KernelFamily::InverseMultiquadric:
            return std::pow(s.imq_offset * s.imq_offset + r2 / (h * h), -1.5) / (h * h);
        case KernelFamily::Matern32:
            return 3.0 / (h * h) * std::exp(-std::sqrt(3.0 * r2) / h);
    }
    return 0.0;
}

/// Central finite-difference gradient of f at y.
template <class F>
Point fd_gradient(F f, const Point& y, double h = 1e-5) {
    Point g(y.size());
    for (Index k = 0; k < y.size(); ++k) {
        Point a = y;
        Point b = y;
        a[k] += h;
        b[k] -= h;
        g[k] = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(1e-300, b.norm());
}

inline double rel_err(const Points& a, const Points& b) {
    return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace testsupport
