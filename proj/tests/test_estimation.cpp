#include "splitdoor/discovery.hpp"
#include "splitdoor/error.hpp"
#include "splitdoor/estimation.hpp"

#include <doctest.h>

#include <cmath>

using namespace splitdoor;

namespace {

SplitDoorInstance inst(std::string focal, std::string target, std::size_t k, std::vector<double> x,
                       std::vector<double> y_r)
{
    SplitDoorInstance in;
    in.period.focal_id = std::move(focal);
    in.period.target_id = std::move(target);
    in.period.period_index = k;
    in.period.x = std::move(x);
    in.period.y_r = std::move(y_r);
    in.rho_ij_tau = in.period.sum_y_r() / in.period.sum_x();
    return in;
}

}  // namespace

TEST_CASE("targets of one focal period add up; periods stay separate")
{
    const std::vector<SplitDoorInstance> v{inst("a", "t2", 0, {10, 10}, {1, 1}), inst("b", "t", 0, {5, 5}, {1, 0}),
                                           inst("a", "t1", 0, {10, 10}, {2, 0}), inst("a", "t1", 1, {4, 4}, {2, 2})};
    const auto f = aggregate_focal(v);
    REQUIRE(f.size() == 3);
    CHECK(f[0].focal_id == "a");
    CHECK(f[0].period_index == 0);
    CHECK(f[0].n_targets == 2);
    CHECK(f[0].rho_i_tau == doctest::Approx(0.2));
    CHECK(f[1].rho_i_tau == doctest::Approx(0.5));
    CHECK(f[2].rho_i_tau == doctest::Approx(0.1));

    const auto e = mean_effect(f);
    CHECK(e.N == 3);
    CHECK(e.rho_hat == doctest::Approx(0.8 / 3.0));
    const double m = 0.8 / 3.0;
    const double ss = (0.2 - m) * (0.2 - m) + (0.5 - m) * (0.5 - m) + (0.1 - m) * (0.1 - m);
    CHECK(e.sigma_hat == doctest::Approx(std::sqrt(ss / 2.0)));

    const auto w = mean_effect(f, Weighting::Traffic);
    CHECK(w.rho_hat == doctest::Approx((20 * 0.2 + 8 * 0.5 + 10 * 0.1) / 38.0));
    CHECK_THROWS_AS(aggregate_focal({}), DataError);
}

TEST_CASE("naive CTR is a ratio of sums")
{
    std::vector<PairPeriod> ps(2);
    ps[0].x = {10, 10};
    ps[0].y_r = {1, 1};
    ps[1].x = {1, 1};
    ps[1].y_r = {1, 1};
    CHECK(naive_ctr(ps) == doctest::Approx(4.0 / 22.0));
    CHECK(naive_ctr_mean_of_ratios(ps) == doctest::Approx(0.55));
    ps[0].x = {0, 0};
    ps[1].x = {0, 0};
    CHECK_THROWS_AS(naive_ctr(ps), DataError);
}

TEST_CASE("group breakdown orders by instance count and uses all group periods for the naive CTR")
{
    const std::vector<SplitDoorInstance> v{inst("a", "t", 0, {10, 10}, {1, 1}), inst("b", "t", 0, {10, 10}, {2, 2}),
                                           inst("c", "t", 0, {5, 5}, {1, 0})};
    std::vector<PairPeriod> ps;
    for (const auto& in : v) ps.push_back(in.period);
    PairPeriod extra;  // not accepted, still part of group "g1"
    extra.focal_id = "a";
    extra.period_index = 1;
    extra.x = {20, 20};
    extra.y_r = {10, 10};
    ps.push_back(extra);

    const std::map<std::string, std::string> groups{{"a", "g1"}, {"b", "g1"}};
    const auto g = group_breakdown(v, ps, groups);
    REQUIRE(g.size() == 2);
    CHECK(g[0].group == "g1");
    CHECK(g[0].n_instances == 2);
    CHECK(g[0].n_focals == 2);
    CHECK(g[0].effect.rho_hat == doctest::Approx(0.15));
    CHECK(g[0].naive_ctr == doctest::Approx(26.0 / 80.0));
    CHECK(g[1].group == "unknown");
    CHECK(g[1].naive_ctr == doctest::Approx(0.1));
}
