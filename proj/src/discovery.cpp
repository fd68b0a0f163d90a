#include "splitdoor/discovery.hpp"

#include "splitdoor/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace splitdoor {

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1), got " + std::to_string(alpha));
}

std::vector<double> Screen::p_values() const
{
    std::vector<double> p;
    p.reserve(results.size());
    for (const auto& r : results) p.push_back(r.p_value);
    return p;
}

Screen screen_periods(std::span<const PairPeriod> periods, std::size_t n_resamples, std::uint64_t seed, int threads)
{
    if (periods.empty()) throw DataError("no testable periods");
    if (n_resamples == 0) throw ArgumentError("number of resamples must be positive");

    Screen s;
    s.n_resamples = n_resamples;
    s.seed = seed;
    for (const auto& p : periods) {
        if (p.sum_x() <= 0.0) {
            ++s.excluded_zero_x;
        } else if (is_constant(p.x)) {
            ++s.excluded_degenerate_x;
        } else if (is_constant(p.y_d)) {
            ++s.excluded_constant_direct;
        } else {
            s.tested.push_back(p);
        }
    }
    if (s.tested.empty()) throw DataError("no testable periods");
    std::sort(s.tested.begin(), s.tested.end(), [](const PairPeriod& l, const PairPeriod& r) {
        return std::tie(l.focal_id, l.target_id, l.period_index) < std::tie(r.focal_id, r.target_id, r.period_index);
    });

    const auto pool = WindowPool::from_periods(s.tested);
    s.results = randomization_pvalues(s.tested, pool, n_resamples, seed, threads);
    return s;
}

DiscoveryRun threshold(const Screen& screen, double alpha)
{
    check_alpha(alpha);
    DiscoveryRun run;
    run.alpha = alpha;
    run.m = screen.m();
    run.all_p_values = screen.p_values();
    run.n_resamples = screen.n_resamples;
    run.seed = screen.seed;
    run.excluded_degenerate_x = screen.excluded_degenerate_x;
    run.excluded_zero_x = screen.excluded_zero_x;
    for (std::size_t i = 0; i < screen.tested.size(); ++i) {
        const auto& r = screen.results[i];
        if (!(r.p_value > alpha)) continue;
        const auto& pp = screen.tested[i];
        run.instances.push_back({pp, r, pp.sum_y_r() / pp.sum_x()});
    }
    run.W = run.instances.size();
    return run;
}

DiscoveryRun discover(std::span<const PairPeriod> periods, double alpha, std::size_t n_resamples, std::uint64_t seed,
                      int threads)
{
    check_alpha(alpha);
    return threshold(screen_periods(periods, n_resamples, seed, threads), alpha);
}

}  // namespace splitdoor
