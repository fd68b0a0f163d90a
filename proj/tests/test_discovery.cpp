#include "splitdoor/discovery.hpp"
#include "splitdoor/error.hpp"
#include "splitdoor/synthgen.hpp"

#include <doctest.h>

using namespace splitdoor;

namespace {

std::vector<PairPeriod> synthetic_periods(std::size_t pairs, double confounded, std::uint64_t seed)
{
    GeneratorParams gp;
    gp.n_pairs = pairs;
    gp.n_days = 60;
    gp.gamma1 = 8.0;
    gp.gamma2 = 3.0;
    gp.confounded_fraction = confounded;
    gp.seed = seed;
    return filter_constant_direct(slice_periods(generate_panel(gp).panel, 15)).periods;
}

}  // namespace

TEST_CASE("acceptance is strict and monotone in alpha")
{
    const auto periods = synthetic_periods(150, 0.5, 4);
    const auto screen = screen_periods(periods, 200, 8);
    CHECK(screen.m() == periods.size());
    std::size_t prev = screen.m() + 1;
    for (double a : {0.5, 0.8, 0.9, 0.95, 0.99}) {
        const auto run = threshold(screen, a);
        CHECK(run.W <= prev);
        prev = run.W;
        for (const auto& in : run.instances) {
            CHECK(in.test.p_value > a);
            CHECK(in.rho_ij_tau == in.period.sum_y_r() / in.period.sum_x());
        }
    }
    // p-values live on the grid k / (R + 1): above 1 - 1/(R+1) only p = 1 remains.
    for (const auto& in : threshold(screen, 200.0 / 201.0).instances) CHECK(in.test.p_value == 1.0);
    CHECK_THROWS_AS(threshold(screen, 0.0), ArgumentError);
    CHECK_THROWS_AS(threshold(screen, 1.0), ArgumentError);
}

TEST_CASE("confounded pairs are rejected far more often than independent ones")
{
    const auto periods = synthetic_periods(200, 0.5, 9);
    const auto run = discover(periods, 0.5, 200, 3);
    std::size_t conf = 0, indep = 0;
    for (const auto& in : run.instances) {
        // the first half of the generated pairs carry the shared shock
        (in.period.focal_id < "f000100" ? conf : indep)++;
    }
    CHECK(indep > 5 * conf);
}

TEST_CASE("degenerate periods are excluded from m")
{
    auto periods = synthetic_periods(20, 0.0, 2);
    const auto m0 = periods.size();
    PairPeriod flat = periods.front();
    flat.target_id = "zz_flat";
    flat.x.assign(flat.x.size(), 7.0);
    PairPeriod zero = periods.front();
    zero.target_id = "zz_zero";
    zero.x.assign(zero.x.size(), 0.0);
    PairPeriod const_d = periods.front();
    const_d.target_id = "zz_const";
    const_d.y_d.assign(const_d.y_d.size(), 3.0);
    periods.insert(periods.end(), {flat, zero, const_d});

    const auto s = screen_periods(periods, 50, 1);
    CHECK(s.m() == m0);
    CHECK(s.excluded_degenerate_x == 1);
    CHECK(s.excluded_zero_x == 1);
    CHECK(s.excluded_constant_direct == 1);

    std::vector<PairPeriod> only_bad{flat, zero};
    CHECK_THROWS_WITH_AS(screen_periods(only_bad, 50, 1), "no testable periods", DataError);
    CHECK_THROWS_AS(screen_periods({}, 50, 1), DataError);
}

TEST_CASE("screen results do not depend on input order or thread count")
{
    auto periods = synthetic_periods(60, 0.3, 5);
    const auto a = screen_periods(periods, 100, 77, 1);
    std::reverse(periods.begin(), periods.end());
    const auto b = screen_periods(periods, 100, 77, 4);
    CHECK(a.p_values() == b.p_values());
}
