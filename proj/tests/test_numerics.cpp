#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "countgest/matrix.hpp"
#include "countgest/optim.hpp"
#include "countgest/pca.hpp"
#include "countgest/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

using namespace countgest;

namespace {

// Reference xoshiro256++ as published by Blackman and Vigna, written out
// independently of the library so divergence in either copy is caught.
struct RefXoshiro {
    std::uint64_t s[4];

    explicit RefXoshiro(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

double column_variance(const Matrix& centered_projections, std::size_t col) {
    double acc = 0.0;
    for (std::size_t i = 0; i < centered_projections.rows(); ++i) {
        const double v = centered_projections(i, col);
        acc += v * v;
    }
    return acc;
}

} // namespace

TEST_CASE("rng matches the reference xoshiro256++ stream") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL, ~0ULL}) {
        Rng rng(seed);
        RefXoshiro ref(seed);
        for (int i = 0; i < 1000; ++i) {
            CHECK(rng.next_u64() == ref.next());
        }
    }
}

TEST_CASE("rng uniform stays in [0,1) with a sane mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    // sd of the mean is 1/sqrt(12 n) ~ 0.0009; allow 5 sigma
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("rng uniform(lo, hi) respects the bounds") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-2.5, 3.5);
        CHECK(u >= -2.5);
        CHECK(u < 3.5);
    }
}

TEST_CASE("rng uniform_below is unbiased over a small range") {
    Rng rng(3);
    std::array<int, 5> counts = {};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t v = rng.uniform_below(5);
        REQUIRE(v < 5);
        counts[v] += 1;
    }
    for (int c : counts) {
        // expected 20000, sd = sqrt(n p (1-p)) = 126; allow 5 sigma
        CHECK(std::abs(c - 20000) < 640);
    }
}

TEST_CASE("rng derive produces streams disjoint from the parent") {
    Rng parent(99);
    Rng child_a = parent.derive(1);
    Rng child_b = parent.derive(2);
    Rng parent_copy(99);

    int equal_ab = 0;
    int equal_ap = 0;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t a = child_a.next_u64();
        const std::uint64_t b = child_b.next_u64();
        const std::uint64_t p = parent_copy.next_u64();
        equal_ab += a == b;
        equal_ap += a == p;
    }
    CHECK(equal_ab == 0);
    CHECK(equal_ap == 0);
}

TEST_CASE("rng derive is independent of the parent's draw position") {
    Rng fresh(123);
    Rng advanced(123);
    for (int i = 0; i < 17; ++i) advanced.next_u64();

    Rng a = fresh.derive(5);
    Rng b = advanced.derive(5);
    for (int i = 0; i < 16; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("rng shuffle permutes and is roughly uniform") {
    Rng rng(17);
    std::map<std::vector<int>, int> counts;
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        std::vector<int> v = {0, 1, 2};
        rng.shuffle(v);
        std::vector<int> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(sorted == std::vector<int>({0, 1, 2}));
        counts[v] += 1;
    }
    CHECK(counts.size() == 6);
    for (const auto& [perm, c] : counts) {
        // expected 10000, sd = 91; allow 5 sigma
        CHECK(std::abs(c - 10000) < 460);
    }
}

TEST_CASE("adam single scalar step matches the closed form") {
    Matrix p(1, 1);
    p(0, 0) = 1.0;
    Matrix g(1, 1);
    g(0, 0) = 1.0;
    AdamState state(1, 1, 0.1);

    adam_step(p, g, state);

    // m_hat = v_hat = 1 after bias correction, so the step is lr/(1+eps)
    const double expected = 1.0 - 0.1 / (1.0 + 1e-8);
    CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(state.step == 1);
}

TEST_CASE("adam trajectory matches an independent scalar recurrence") {
    Matrix p(1, 1);
    p(0, 0) = 0.7;
    AdamState state(1, 1, 0.05);

    double ref_p = 0.7;
    double ref_m = 0.0;
    double ref_v = 0.0;
    Rng rng(21);
    for (int t = 1; t <= 200; ++t) {
        const double grad = rng.uniform(-2.0, 2.0);
        Matrix g(1, 1);
        g(0, 0) = grad;
        adam_step(p, g, state);

        ref_m = 0.9 * ref_m + 0.1 * grad;
        ref_v = 0.999 * ref_v + 0.001 * grad * grad;
        const double m_hat = ref_m / (1.0 - std::pow(0.9, t));
        const double v_hat = ref_v / (1.0 - std::pow(0.999, t));
        ref_p -= 0.05 * m_hat / (std::sqrt(v_hat) + 1e-8);

        CHECK(p(0, 0) == doctest::Approx(ref_p).epsilon(1e-12));
    }
}

TEST_CASE("adam minimizes a quadratic") {
    Matrix p(1, 2);
    p(0, 0) = 3.0;
    p(0, 1) = -2.0;
    AdamState state(1, 2, 0.1);

    for (int t = 0; t < 2000; ++t) {
        Matrix g(1, 2);
        g(0, 0) = 2.0 * p(0, 0);
        g(0, 1) = 2.0 * p(0, 1);
        adam_step(p, g, state);
    }
    CHECK(std::abs(p(0, 0)) < 1e-3);
    CHECK(std::abs(p(0, 1)) < 1e-3);
}

TEST_CASE("adam rejects shape mismatches") {
    Matrix p(2, 2);
    Matrix g(2, 3);
    AdamState state(2, 2, 0.01);
    CHECK_THROWS_AS(adam_step(p, g, state), std::invalid_argument);
}

TEST_CASE("glorot uniform stays inside the fan bound") {
    Rng rng(5);
    const std::size_t rows = 10;
    const std::size_t cols = 156;
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w = glorot_uniform(rows, cols, rng);

    REQUIRE(w.rows() == rows);
    REQUIRE(w.cols() == cols);
    double max_abs = 0.0;
    for (double v : w) {
        CHECK(std::abs(v) <= bound);
        max_abs = std::max(max_abs, std::abs(v));
    }
    // 1560 draws should come close to the edge of the support
    CHECK(max_abs > 0.98 * bound);
}

TEST_CASE("glorot uniform matches the uniform moments") {
    Rng rng(31);
    Matrix w = glorot_uniform(250, 400, rng);
    const double bound = std::sqrt(6.0 / 650.0);

    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());

    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());

    CHECK(std::abs(mean) < 0.01 * bound);
    CHECK(var == doctest::Approx(bound * bound / 3.0).epsilon(0.02));
}

TEST_CASE("pca recovers a one dimensional subspace") {
    // samples on a line through (1, -2, 0.5) with direction (2, 1, -2)/3
    const std::array<double, 3> dir = {2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0};
    Rng rng(13);
    Matrix samples(40, 3);
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        const double t = rng.uniform(-5.0, 5.0);
        samples(i, 0) = 1.0 + t * dir[0];
        samples(i, 1) = -2.0 + t * dir[1];
        samples(i, 2) = 0.5 + t * dir[2];
    }

    PcaModel model = pca_fit(samples, 1);
    REQUIRE(model.basis.rows() == 3);
    REQUIRE(model.basis.cols() == 1);
    CHECK(model.variance_fractions[0] == doctest::Approx(1.0).epsilon(1e-9));

    double dot = 0.0;
    for (std::size_t i = 0; i < 3; ++i) dot += model.basis(i, 0) * dir[i];
    CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-9));

    // projections of two points on the line differ by their coordinates
    const double t0 = 2.25;
    const double t1 = -1.5;
    const std::array<double, 3> x0 = {1.0 + t0 * dir[0], -2.0 + t0 * dir[1], 0.5 + t0 * dir[2]};
    const std::array<double, 3> x1 = {1.0 + t1 * dir[0], -2.0 + t1 * dir[1], 0.5 + t1 * dir[2]};
    const double delta = model.project(x0.data())[0] - model.project(x1.data())[0];
    CHECK(std::abs(delta) == doctest::Approx(t0 - t1).epsilon(1e-9));
}

TEST_CASE("pca basis columns are orthonormal with the sign convention") {
    Rng rng(29);
    Matrix samples(30, 6);
    for (double& v : samples) v = rng.uniform(-1.0, 1.0);

    PcaModel model = pca_fit(samples, 4);
    for (std::size_t a = 0; a < 4; ++a) {
        double max_abs = 0.0;
        double max_signed = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            if (std::abs(model.basis(i, a)) > max_abs) {
                max_abs = std::abs(model.basis(i, a));
                max_signed = model.basis(i, a);
            }
        }
        CHECK(max_signed > 0.0);
        for (std::size_t b = 0; b < 4; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 6; ++i) dot += model.basis(i, a) * model.basis(i, b);
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("pca variance fractions match projected variances") {
    Rng rng(37);
    Matrix samples(25, 5);
    for (double& v : samples) v = rng.uniform(-3.0, 3.0);

    PcaModel model = pca_fit(samples, 5 - 1);

    // total variance of the centered data, straight from the definition
    std::vector<double> mean(5, 0.0);
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t j = 0; j < 5; ++j) mean[j] += samples(i, j);
    for (double& m : mean) m /= 25.0;
    double total = 0.0;
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            const double d = samples(i, j) - mean[j];
            total += d * d;
        }

    Matrix projections(25, 4);
    for (std::size_t i = 0; i < 25; ++i) {
        const std::vector<double> p = model.project(samples.row(i));
        for (std::size_t j = 0; j < 4; ++j) projections(i, j) = p[j];
    }

    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 4; ++j) {
        const double fraction = column_variance(projections, j) / total;
        CHECK(model.variance_fractions[j] == doctest::Approx(fraction).epsilon(1e-9));
        CHECK(model.variance_fractions[j] <= previous + 1e-12);
        previous = model.variance_fractions[j];
    }
    CHECK(model.cumulative_fraction() <= 1.0 + 1e-12);
}

TEST_CASE("pca rejects degenerate inputs") {
    Matrix constant(4, 3, 2.5);
    CHECK_THROWS_AS(pca_fit(constant, 1), std::invalid_argument);

    Matrix one_sample(1, 3);
    CHECK_THROWS_AS(pca_fit(one_sample, 1), std::invalid_argument);

    Rng rng(41);
    Matrix ok(5, 3);
    for (double& v : ok) v = rng.uniform(0.0, 1.0);
    CHECK_THROWS_AS(pca_fit(ok, 0), std::invalid_argument);
    CHECK_THROWS_AS(pca_fit(ok, 4), std::invalid_argument);
}

TEST_CASE("sum squared error agrees with the definition") {
    Rng rng(43);
    Matrix a(7, 4);
    Matrix b(7, 4);
    for (double& v : a) v = rng.uniform(-2.0, 2.0);
    for (double& v : b) v = rng.uniform(-2.0, 2.0);

    double expected = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double d = a(i, j) - b(i, j);
            expected += d * d;
        }
    CHECK(sum_squared_error(a, b) == doctest::Approx(expected).epsilon(1e-12));

    Matrix wrong(4, 7);
    CHECK_THROWS_AS(sum_squared_error(a, wrong), std::invalid_argument);
}

TEST_CASE("all_finite flags NaN and infinity") {
    Matrix m(2, 2, 1.0);
    CHECK(all_finite(m));
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(m));
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(all_finite(m));
}

TEST_CASE("matrix from_rows and equality") {
    Matrix m = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 2);
    CHECK(m(1, 0) == 3.0);
    Matrix n = m;
    CHECK(m == n);
    n(0, 0) = 9.0;
    CHECK_FALSE(m == n);
}
