#include <doctest.h>

#include <cmath>
#include <random>

#include "mmdq/embedding.hpp"
#include "mmdq/errors.hpp"
#include "support.hpp"

using namespace mmdq;
using namespace testsupport;

namespace {

struct NaiveMoments {
    double v0 = 0.0;
    Point v1;
    double vbar0 = 0.0;
    Point vbar1;
};

NaiveMoments naive_moments(const EmpiricalTarget& t, const KernelSpec& s, const Point& y) {
    NaiveMoments m;
    m.v1 = Point::Zero(y.size());
    m.vbar1 = Point::Zero(y.size());
    for (Index l = 0; l < t.size(); ++l) {
        const Point x = t.samples().row(l);
        const double k = t.weights()[l] * naive_kernel(s, x, y);
        const double kb = t.weights()[l] * naive_companion(s, x, y);
        m.v0 += k;
        m.vbar0 += kb;
        m.v1 += k * x;
        m.vbar1 += kb * x;
    }
    return m;
}

double naive_c_pi(const EmpiricalTarget& t, const KernelSpec& s) {
    double c = 0.0;
    for (Index a = 0; a < t.size(); ++a) {
        for (Index b = 0; b < t.size(); ++b) {
            c += t.weights()[a] * t.weights()[b] * naive_kernel(s, t.samples().row(a), t.samples().row(b));
        }
    }
    return c;
}

double half_sq_mmd(const EmpiricalTarget& t, const KernelSpec& s, const Points& y, const Vector& w) {
    const double c = naive_c_pi(t, s);
    double cross = 0.0;
    double self = 0.0;
    for (Index i = 0; i < y.rows(); ++i) {
        cross += w[i] * naive_moments(t, s, y.row(i)).v0;
        for (Index j = 0; j < y.rows(); ++j) {
            self += w[i] * w[j] * naive_kernel(s, y.row(i), y.row(j));
        }
    }
    return 0.5 * (c - 2.0 * cross + self);
}

EmpiricalTarget random_target(std::mt19937_64& rng, Index n, Index d, bool weighted) {
    Points x = random_points(rng, n, d);
    if (!weighted) {
        return EmpiricalTarget(x);
    }
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
        w[i] = u(rng);
    }
    return EmpiricalTarget(x, w / w.sum());
}

Point pt(std::initializer_list<double> v) { return rows({v}).row(0); }

std::vector<KernelSpec> three_families() {
    return {KernelSpec::squared_exponential(1.1), KernelSpec::inverse_multiquadric(0.9, 1.0), KernelSpec::matern32(1.4)};
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("v0 examples") {
    const auto se = KernelSpec::squared_exponential(1.0);
    CHECK(v0(EmpiricalTarget(rows({{0.0}})), se, pt({0.0})) == 1.0);
    CHECK(v0(EmpiricalTarget(rows({{-1.0}, {1.0}})), se, pt({0.0})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("v1 examples") {
    const auto se = KernelSpec::squared_exponential(1.0);
    CHECK(v1(EmpiricalTarget(rows({{3.0}})), se, pt({3.0}))[0] == 3.0);
    CHECK(v1(EmpiricalTarget(rows({{-1.0}, {1.0}})), se, pt({0.0})).norm() == 0.0);
}

TEST_CASE("moments equal brute-force sums") {
    std::mt19937_64 rng(1);
    for (const auto& spec : three_families()) {
        for (bool weighted : {false, true}) {
            const auto t = random_target(rng, 50, 3, weighted);
            const Points y = random_points(rng, 6, 3, 1.5);
            const Moments m = kernel_moments(t, spec, y);
            for (Index i = 0; i < y.rows(); ++i) {
                const NaiveMoments ref = naive_moments(t, spec, y.row(i));
                CHECK(std::abs(m.v0[i] - ref.v0) <= 1e-14);
                CHECK(std::abs(m.vbar0[i] - ref.vbar0) <= 1e-14);
                CHECK((m.v1.row(i) - ref.v1).cwiseAbs().maxCoeff() <= 1e-14);
                CHECK((m.vbar1.row(i) - ref.vbar1).cwiseAbs().maxCoeff() <= 1e-14);
                CHECK(m.v0[i] > 0.0);
                CHECK(m.v0[i] <= spec.diagonal() + 1e-15);
                // Scalar entry points agree with the batched pass.
                CHECK(v0(t, spec, y.row(i)) == m.v0[i]);
                CHECK((vbar1(t, spec, y.row(i)) - m.vbar1.row(i)).norm() == 0.0);
            }
        }
    }
}

TEST_CASE("grad v0 matches finite differences") {
    std::mt19937_64 rng(2);
    for (const auto& spec : three_families()) {
        const auto t = random_target(rng, 30, 2, false);
        const Point y = random_points(rng, 1, 2).row(0);
        const Point fd = fd_gradient([&](const Point& z) { return naive_moments(t, spec, z).v0; }, y);
        CHECK((grad_v0(t, spec, y) - fd).norm() <= 1e-7 * fd.norm());
    }
}

TEST_CASE("kernel matrices") {
    const auto imq = KernelSpec::inverse_multiquadric(1.0, 2.0);
    const Matrix one = kernel_matrix(imq, rows({{4.0, 1.0}}));
    CHECK(one.rows() == 1);
    CHECK(one(0, 0) == 0.5);

    const Matrix dup = kernel_matrix(KernelSpec::squared_exponential(1.0), rows({{1.0}, {1.0}, {0.0}}));
    CHECK(dup.row(0) == dup.row(1));

    std::mt19937_64 rng(3);
    for (const auto& spec : three_families()) {
        const Points y = random_points(rng, 4, 2);
        const Matrix k = kernel_matrix(spec, y);
        const Matrix kb = kbar_matrix(spec, y);
        for (Index i = 0; i < 4; ++i) {
            CHECK(k(i, i) == spec.diagonal());
            for (Index j = 0; j < 4; ++j) {
                CHECK(k(i, j) == k(j, i));
                CHECK(std::abs(k(i, j) - naive_kernel(spec, y.row(i), y.row(j))) <= 1e-15);
                CHECK(std::abs(kb(i, j) - naive_companion(spec, y.row(i), y.row(j))) <= 1e-14);
            }
        }
    }
}

TEST_CASE("optimal weights, single particle") {
    std::mt19937_64 rng(4);
    for (const auto& spec : three_families()) {
        const auto t = random_target(rng, 20, 2, true);
        const Points y = random_points(rng, 1, 2);
        const Vector w = optimal_weights(t, spec, y);
        CHECK(w[0] == doctest::Approx(naive_moments(t, spec, y.row(0)).v0 / spec.diagonal()).epsilon(1e-11));
    }
}

TEST_CASE("optimal weights reproduce a target supported on the particles") {
    std::mt19937_64 rng(5);
    const Points x = separated_points(rng, 6, 2, 2.0, 1.0);
    const EmpiricalTarget t(x);
    const Vector w = optimal_weights(t, KernelSpec::squared_exponential(1.0), x);
    CHECK((w - Vector::Constant(6, 1.0 / 6.0)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("optimal weights beat random competitors") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (const auto& spec : three_families()) {
        const auto t = random_target(rng, 40, 2, false);
        const MomentCache cache = MomentCache::exact(t, spec);
        const Points y = random_points(rng, 3, 2);
        const Vector w = optimal_weights(t, spec, y);
        const double best = mmd(t, spec, {y, w}, cache);
        for (int c = 0; c < 100; ++c) {
            Vector other = w;
            for (Index i = 0; i < 3; ++i) {
                other[i] += normal(rng);
            }
            CHECK(best <= mmd(t, spec, {y, other}, cache) + 1e-10);
        }
    }
}

TEST_CASE("mmd examples") {
    const auto se = KernelSpec::squared_exponential(1.0);
    std::mt19937_64 rng(7);
    const auto t = random_target(rng, 25, 3, true);
    CHECK(mmd(t, se, {t.samples(), t.weights()}, MomentCache::exact(t, se)) <= 1e-8);

    const EmpiricalTarget delta(rows({{0.0}}));
    const MomentCache dc = MomentCache::exact(delta, se);
    CHECK(mmd(delta, se, {rows({{0.0}}), Vector::Ones(1)}, dc) == 0.0);

    // Three-term expansion 1 - 2 w e^-1 + w^2 at w = 0.5.
    const double expect = std::sqrt(1.0 - 2.0 * 0.5 * std::exp(-1.0) + 0.25);
    const double got = mmd(delta, se, {rows({{1.0}}), Vector::Constant(1, 0.5)}, dc);
    CHECK(got == doctest::Approx(expect).epsilon(1e-15));
    CHECK(got == doctest::Approx(0.939213).epsilon(1e-6));
}

TEST_CASE("C_pi matches the double sum, and the subsampled estimate is close") {
    std::mt19937_64 rng(8);
    for (const auto& spec : three_families()) {
        const auto t = random_target(rng, 60, 2, true);
        const MomentCache exact = MomentCache::exact(t, spec);
        CHECK(exact.c_pi == doctest::Approx(naive_c_pi(t, spec)).epsilon(1e-13));
        CHECK(exact.pairs == 0);
        const long pairs = 200000;
        const MomentCache sub = MomentCache::subsampled(t, spec, pairs, 17);
        CHECK(sub.pairs == pairs);
        CHECK(std::abs(sub.c_pi - exact.c_pi) <= 5.0 * spec.diagonal() / std::sqrt(double(pairs)));
        // Same seed, same estimate.
        CHECK(MomentCache::subsampled(t, spec, pairs, 17).c_pi == sub.c_pi);
    }
}

TEST_CASE("fm examples and bounds") {
    const auto se = KernelSpec::squared_exponential(1.0);
    std::mt19937_64 rng(9);
    const Points x = separated_points(rng, 5, 2, 2.0, 0.8);
    const EmpiricalTarget t(x);
    const MomentCache cache = MomentCache::exact(t, se);
    CHECK(fm(t, se, x, cache) <= 1e-10);

    const EmpiricalTarget delta(rows({{1.5, -2.0}}));
    CHECK(fm(delta, se, rows({{1.5, -2.0}}), MomentCache::exact(delta, se)) <= 1e-10);

    for (const auto& spec : three_families()) {
        const auto tr = random_target(rng, 30, 2, false);
        const MomentCache c = MomentCache::exact(tr, spec);
        const Points y = random_points(rng, 3, 2);
        const double f = fm(tr, spec, y, c);
        CHECK(f >= 0.0);
        CHECK(f <= 0.5 * c.c_pi);
        std::normal_distribution<double> normal(0.0, 0.3);
        const Vector w = optimal_weights(tr, spec, y);
        double lowest = INFINITY;
        for (int k = 0; k < 1000; ++k) {
            Vector other = w;
            for (Index i = 0; i < 3; ++i) {
                other[i] += normal(rng) * (k % 10 == 0 ? 1e-3 : 1.0);
            }
            lowest = std::min(lowest, half_sq_mmd(tr, spec, y, other));
        }
        CHECK(lowest - f >= -1e-10);
        // Two forms of the closed-form value agree.
        const Matrix k = kernel_matrix(spec, y);
        const Vector v = kernel_moments(tr, spec, y).v0;
        CHECK(std::abs(0.5 * (c.c_pi - w.dot(v)) - 0.5 * (c.c_pi - w.dot(k * w))) <= 1e-10);
    }
}

TEST_CASE("grad_fm vanishes at the target atoms") {
    std::mt19937_64 rng(10);
    const Points x = separated_points(rng, 5, 2, 2.0, 0.8);
    const EmpiricalTarget t(x);
    for (const auto& spec : three_families()) {
        CHECK(grad_fm(t, spec, x, MomentCache::exact(t, spec)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("grad_fm matches finite differences of fm") {
    std::mt19937_64 rng(11);
    for (const auto& spec : {KernelSpec::squared_exponential(1.5), KernelSpec::inverse_multiquadric(1.5, 1.0),
                             KernelSpec::matern32(2.0)}) {
        const auto t = random_target(rng, 50, 3, false);
        const MomentCache cache = MomentCache::exact(t, spec);
        const Points y = random_points(rng, 4, 3);
        const Points g = grad_fm(t, spec, y, cache);
        Points fd(4, 3);
        const double h = 1e-5;
        for (Index i = 0; i < 4; ++i) {
            for (Index k = 0; k < 3; ++k) {
                Points a = y;
                Points b = y;
                a(i, k) += h;
                b(i, k) -= h;
                fd(i, k) = (fm(t, spec, a, cache) - fm(t, spec, b, cache)) / (2.0 * h);
            }
        }
        CHECK(rel_err(g, fd) <= 1e-5);
    }
}

TEST_CASE("grad_fm for one particle and a single atom") {
    const auto se = KernelSpec::squared_exponential(1.3);
    const EmpiricalTarget delta(rows({{0.5, 0.2}}));
    const Points y = rows({{1.1, -0.4}});
    const NaiveMoments m = naive_moments(delta, se, y.row(0));
    const Point expect = (m.v0 / se.diagonal()) * (m.vbar0 * y.row(0) - m.vbar1);
    const Points g = grad_fm(delta, se, y, MomentCache::exact(delta, se));
    // Jitter of 1e-12 B in the weight solve bounds the agreement.
    CHECK((g.row(0) - expect).norm() <= 1e-11 * expect.norm());
}

TEST_CASE("vhat1 identities") {
    std::mt19937_64 rng(12);
    const auto spec = KernelSpec::squared_exponential(1.2);
    const auto t = random_target(rng, 40, 2, false);
    const Points y = random_points(rng, 4, 2);

    // Zero weights leave only grad v0.
    const Points zero = vhat1(t, spec, y, Vector::Zero(4));
    for (Index i = 0; i < 4; ++i) {
        const Point fd = fd_gradient([&](const Point& z) { return naive_moments(t, spec, z).v0; }, Point(y.row(i)));
        CHECK((zero.row(i) - fd).norm() <= 1e-7 * fd.norm());
    }

    // With w = w_hat and kbar = (2/s^2) kappa, K w_hat = v0 collapses the row to (2/s^2) v1.
    const Vector w = optimal_weights(t, spec, y);
    const Points vh = vhat1(t, spec, y, w);
    const double lambda = 2.0 / (spec.bandwidth * spec.bandwidth);
    for (Index i = 0; i < 4; ++i) {
        const Point expect = lambda * naive_moments(t, spec, y.row(i)).v1;
        CHECK((vh.row(i) - expect).norm() <= 1e-9 * expect.norm());
    }

    // M = 1, w = w_hat: vhat1 - kbar w y is proportional to vbar1 - vbar0 y.
    for (int k = 0; k < 20; ++k) {
        const Points one = random_points(rng, 1, 2, 1.5);
        const Vector w1 = optimal_weights(t, spec, one);
        const Point lhs = vhat1(t, spec, one, w1).row(0) - spec.companion_diagonal() * w1[0] * one.row(0);
        const NaiveMoments m = naive_moments(t, spec, one.row(0));
        const Point dir = m.vbar1 - m.vbar0 * one.row(0);
        const double c = lhs.dot(dir) / dir.squaredNorm();
        CHECK((lhs - c * dir).norm() <= 1e-10 * lhs.norm());
    }
}

TEST_CASE("target validation") {
    CHECK_THROWS_AS(EmpiricalTarget(Points(0, 2)), InputError);
    Points bad = rows({{0.0, 1.0}, {NAN, 2.0}});
    CHECK_THROWS_AS(EmpiricalTarget{bad}, InputError);
    const Points ok = rows({{0.0}, {1.0}});
    CHECK_THROWS_AS(EmpiricalTarget(ok, Vector::Constant(2, 0.4)), InputError);
    Vector neg(2);
    neg << 1.5, -0.5;
    CHECK_THROWS_AS(EmpiricalTarget(ok, neg), InputError);
    CHECK_THROWS_AS(EmpiricalTarget(ok, Vector::Constant(3, 1.0 / 3)), InputError);
    CHECK_NOTHROW(EmpiricalTarget(ok, Vector::Constant(2, 0.5)));
}

TEST_CASE("dimension mismatch") {
    const EmpiricalTarget t(rows({{0.0, 1.0}}));
    const auto se = KernelSpec::squared_exponential(1.0);
    CHECK_THROWS_AS(kernel_moments(t, se, rows({{0.0}})), InputError);
    CHECK_THROWS_AS(mmd(t, se, {rows({{0.0}}), Vector::Ones(1)}, MomentCache::exact(t, se)), InputError);
}

TEST_CASE("non-finite configuration reports SingularKernelMatrix") {
    const EmpiricalTarget t(rows({{0.0}}));
    const auto se = KernelSpec::squared_exponential(1.0);
    const Points y = rows({{0.0}, {NAN}});
    try {
        optimal_weights(se, y, Vector::Ones(2));
        FAIL("expected SingularKernelMatrix");
    } catch (const SingularKernelMatrix& e) {
        CHECK(e.configuration().rows() == 2);
    }
}

TEST_CASE("near-duplicate particles are absorbed by jitter") {
    const EmpiricalTarget t(rows({{0.0}, {1.0}}));
    const auto se = KernelSpec::squared_exponential(1.0);
    const Points y = rows({{0.3}, {0.3}});
    const Vector w = optimal_weights(t, se, y);
    CHECK(w.allFinite());
    // Only the total is determined; it matches the single-particle optimum.
    CHECK(w.sum() == doctest::Approx(v0(t, se, y.row(0))).epsilon(1e-9));
    const MomentCache cache = MomentCache::exact(t, se);
    const Points single = y.topRows(1);
    CHECK(mmd(t, se, {y, w}, cache) ==
          doctest::Approx(mmd(t, se, {single, optimal_weights(t, se, single)}, cache)).epsilon(1e-6));
}

}
