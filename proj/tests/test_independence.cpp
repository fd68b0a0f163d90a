#include "oracles.hpp"

#include "splitdoor/error.hpp"
#include "splitdoor/independence.hpp"
#include "splitdoor/seeding.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace splitdoor;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, int hi)
{
    std::uniform_int_distribution<int> d(0, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

PairPeriod make_period(std::string focal, std::string target, std::size_t k, std::vector<double> x,
                       std::vector<double> yd)
{
    PairPeriod p;
    p.focal_id = std::move(focal);
    p.target_id = std::move(target);
    p.period_index = k;
    p.tau = x.size();
    p.y_r.assign(x.size(), 1.0);
    p.x = std::move(x);
    p.y_d = std::move(yd);
    return p;
}

std::vector<PairPeriod> random_periods(std::uint64_t seed, std::size_t n, std::size_t tau)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(20.0, 4.0);
    std::vector<PairPeriod> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(tau), y(tau);
        for (std::size_t t = 0; t < tau; ++t) {
            x[t] = nd(rng);
            y[t] = (i % 3 == 0 ? 0.5 * x[t] : 0.0) + nd(rng);
        }
        out.push_back(make_period("f" + std::to_string(i / 2), "t" + std::to_string(i), i % 2, x, y));
    }
    return out;
}

}  // namespace

TEST_CASE("dcor matches the explicit-matrix oracle on small integer vectors")
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> len(2, 16);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto n = len(rng);
        const auto x = random_vector(rng, n, 3);
        const auto y = random_vector(rng, n, 3);
        CHECK(std::fabs(distance_correlation(x, y) - oracle::dcor(x, y)) <= 1e-12);
    }
}

TEST_CASE("explicit-matrix oracle agrees with the three-sum identity")
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(9), y(9);
        for (std::size_t i = 0; i < 9; ++i) {
            x[i] = nd(rng);
            y[i] = x[i] * x[i] + nd(rng);
        }
        const auto a = oracle::double_centered(x);
        const auto b = oracle::double_centered(y);
        CHECK(oracle::mean_product(a, b) == doctest::Approx(oracle::dcov2_sums(x, y)).epsilon(1e-10));
    }
}

TEST_CASE("dcor is symmetric, scale and shift invariant, and in [0, 1]")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(12), y(12), xs(12);
        for (std::size_t i = 0; i < 12; ++i) {
            x[i] = nd(rng);
            y[i] = std::sin(x[i]) + 0.3 * nd(rng);
            xs[i] = 3.5 * x[i] - 17.0;
        }
        const double d = distance_correlation(x, y);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(distance_correlation(y, x) == doctest::Approx(d).epsilon(1e-12));
        CHECK(distance_correlation(xs, y) == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("dcor edge cases")
{
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> c{2, 2, 2, 2, 2};
    CHECK(distance_correlation(x, x) == doctest::Approx(1.0));
    CHECK(distance_correlation(x, c) == 0.0);
    CHECK(distance_correlation(std::vector<double>{0, 1}, std::vector<double>{5, 3}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(distance_correlation(x, std::vector<double>{1, 2}), ArgumentError);
    CHECK_THROWS_AS(distance_correlation(std::vector<double>{1}, std::vector<double>{1}), ArgumentError);
}

TEST_CASE("resampling p-value counts ties as extreme")
{
    const std::vector<double> null{0.1, 0.5, 0.5, 0.9};
    CHECK(resampling_pvalue(0.5, null) == doctest::Approx(4.0 / 5.0));
    CHECK(resampling_pvalue(1.0, null) == doctest::Approx(1.0 / 5.0));
    CHECK(resampling_pvalue(0.0, null) == 1.0);
}

TEST_CASE("null draws never return the own window and cover the rest")
{
    NullDraws d(42, 5, 2);
    std::vector<int> seen(5, 0);
    for (int i = 0; i < 2000; ++i) ++seen[d.next()];
    CHECK(seen[2] == 0);
    for (int k : {0, 1, 3, 4}) CHECK(seen[k] > 350);

    NullDraws single(1, 1, 0);  // a lone window is its own null
    CHECK(single.next() == 0);
}

TEST_CASE("window pool stores one window per focal period")
{
    std::vector<PairPeriod> ps{make_period("a", "t1", 0, {1, 2, 3}, {1, 2, 4}),
                               make_period("a", "t2", 0, {1, 2, 3}, {3, 2, 1}),
                               make_period("a", "t1", 1, {0, 0, 0}, {1, 2, 3}),
                               make_period("b", "t3", 0, {4, 4, 5}, {1, 2, 3})};
    const auto pool = WindowPool::from_periods(ps);
    CHECK(pool.size() == 2);
    CHECK(pool.index_of("a", 0) == 0u);
    CHECK(pool.index_of("b", 0) == 1u);
    CHECK_FALSE(pool.index_of("a", 1).has_value());
}

TEST_CASE("constant treatment window yields p = 1 without resampling")
{
    WindowPool pool;
    pool.add({1, 2, 3, 4});
    pool.add({4, 3, 2, 5});
    const auto p = make_period("a", "b", 0, {3, 3, 3, 3}, {1, 5, 2, 4});
    const auto r = randomization_pvalue(p, pool, 100, 9);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.degenerate);
}

TEST_CASE("randomization test rejects on strong dependence")
{
    auto ps = random_periods(5, 200, 15);
    const auto pool = WindowPool::from_periods(ps);
    auto p = make_period("zz", "zz", 0, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15},
                         {2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30});
    const auto r = randomization_pvalue(p, pool, 500, 1);
    CHECK(r.p_value <= 2.0 / 501.0);
    CHECK_THROWS_AS(randomization_pvalue(p, WindowPool{}, 10, 1), ArgumentError);
    CHECK_THROWS_AS(randomization_pvalue(p, pool, 0, 1), ArgumentError);
}

TEST_CASE("OpenMP kernel equals the serial reference bit for bit")
{
    const auto ps = random_periods(17, 150, 15);
    const auto pool = WindowPool::from_periods(ps);
    const auto ref = reference::randomization_pvalues(ps, pool, 200, 99);
    for (int threads : {1, 2, 4, 7}) {
        const auto fast = randomization_pvalues(ps, pool, 200, 99, threads);
        REQUIRE(fast.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(fast[i].statistic == ref[i].statistic);
            CHECK(fast[i].p_value == ref[i].p_value);
            CHECK(fast[i].seed == ref[i].seed);
        }
    }
}

TEST_CASE("per-period seeds depend on identity, not position")
{
    auto ps = random_periods(23, 40, 10);
    const auto pool = WindowPool::from_periods(ps);
    const auto a = randomization_pvalues(ps, pool, 100, 5);
    std::reverse(ps.begin(), ps.end());
    const auto b = randomization_pvalues(ps, pool, 100, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].p_value == b[a.size() - 1 - i].p_value);
    CHECK(period_seed(1, "a", "b", 0) != period_seed(1, "b", "a", 0));
    CHECK(period_seed(1, "a", "b", 0) != period_seed(2, "a", "b", 0));
}
