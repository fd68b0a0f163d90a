#pragma once

// Independence screen over all candidate periods and the resulting set of
// split-door instances. p-values do not depend on alpha, so a screen is run
// once and can be thresholded at any number of levels.

#include "splitdoor/core_data.hpp"
#include "splitdoor/independence.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace splitdoor {

inline constexpr double kDefaultAlpha = 0.95;

/// An accepted period together with its test and its CTR estimate
/// sum(y_r) / sum(x).
struct SplitDoorInstance {
    PairPeriod period;
    IndependenceResult test;
    double rho_ij_tau = 0.0;
};

/// All hypothesis tests of one run, in canonical (focal, target, period) order.
struct Screen {
    std::vector<PairPeriod> tested;
    std::vector<IndependenceResult> results;  // results[i] belongs to tested[i]
    std::size_t excluded_degenerate_x = 0;    // constant x window: no test performed
    std::size_t excluded_zero_x = 0;          // sum(x) = 0: CTR undefined
    std::size_t excluded_constant_direct = 0;
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;

    std::size_t m() const { return tested.size(); }
    std::vector<double> p_values() const;
};

struct DiscoveryRun {
    double alpha = kDefaultAlpha;
    std::size_t m = 0;
    std::size_t W = 0;
    std::vector<double> all_p_values;
    std::vector<SplitDoorInstance> instances;
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    std::size_t excluded_degenerate_x = 0;
    std::size_t excluded_zero_x = 0;
};

/// Runs the randomization test on every testable period. Periods with a
/// constant or all-zero x window (or a constant y_d window) are excluded and
/// counted, and never enter m. Throws DataError("no testable periods") when
/// nothing remains.
Screen screen_periods(std::span<const PairPeriod> periods, std::size_t n_resamples = kDefaultResamples,
                      std::uint64_t seed = 0, int threads = 0);

/// Accepts tests with p > alpha (strict). Throws ArgumentError for alpha outside (0, 1).
DiscoveryRun threshold(const Screen& screen, double alpha);

/// screen_periods() followed by threshold().
DiscoveryRun discover(std::span<const PairPeriod> periods, double alpha = kDefaultAlpha,
                      std::size_t n_resamples = kDefaultResamples, std::uint64_t seed = 0, int threads = 0);

void check_alpha(double alpha);

}  // namespace splitdoor
