#pragma once

// Distance correlation and the window-resampling randomization test for
// H0: X independent of Y_D within one PairPeriod.
//
// Two implementations of the batch test live side by side:
//   randomization_pvalues()             OpenMP kernel, pool distances centered once
//   reference::randomization_pvalues()  serial, recomputes every statistic from raw data
// Both share the same arithmetic and draw sequence and must agree bit for bit.

#include "splitdoor/core_data.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace splitdoor {

/// Double-centered pairwise |a - b| distance matrix of one series,
/// stored as its diagonal plus the strict upper triangle (row-major).
class CenteredDistances {
public:
    CenteredDistances() = default;
    explicit CenteredDistances(std::span<const double> v);

    std::size_t size() const { return n_; }
    /// Sum over all n*n entries of A_kl^2.
    double self_inner() const { return self_; }

    /// Sum over all n*n entries of A_kl * B_kl. Sizes must match.
    friend double inner(const CenteredDistances& a, const CenteredDistances& b);

private:
    std::size_t n_ = 0;
    std::vector<double> diag_;
    std::vector<double> upper_;
    double self_ = 0.0;
};

/// dCor from two centered matrices (biased V-statistic form). Returns 0 when
/// either distance variance is 0.
double distance_correlation(const CenteredDistances& a, const CenteredDistances& b);

/// dCor(x, y) in [0, 1]. Throws ArgumentError on length mismatch or n < 2.
double distance_correlation(std::span<const double> x, std::span<const double> y);

inline constexpr std::size_t kDefaultResamples = 1000;

struct IndependenceResult {
    std::size_t period = 0;  // index into the period list that was tested
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;  // x or y_d window was constant
};

/// (1 + #{null >= observed}) / (1 + R), with exact floating comparison.
double resampling_pvalue(double observed, std::span<const double> null_stats);

/// The null pool: one treatment window per (focal product, period).
/// Several targets of the same focal share a window, so it is stored once.
class WindowPool {
public:
    WindowPool() = default;

    /// Adds an anonymous window (never excluded as "own").
    void add(std::vector<double> window);
    /// Adds the window for (focal_id, period_index) unless already present.
    void add(const std::string& focal_id, std::size_t period_index, std::vector<double> window);

    /// Pool of the x windows of the given periods that are themselves testable
    /// (non-constant, positive total).
    static WindowPool from_periods(std::span<const PairPeriod> periods);

    std::size_t size() const { return windows_.size(); }
    bool empty() const { return windows_.empty(); }
    std::size_t tau() const { return windows_.empty() ? 0 : windows_.front().size(); }
    std::span<const double> window(std::size_t i) const { return windows_[i]; }
    std::optional<std::size_t> index_of(const std::string& focal_id, std::size_t period_index) const;

private:
    std::vector<std::vector<double>> windows_;
    std::map<std::pair<std::string, std::size_t>, std::size_t> index_;
};

/// Uniform draws of pool indices, skipping `own` when the pool has other
/// members. The sequence is a pure function of the seed.
class NullDraws {
public:
    NullDraws(std::uint64_t seed, std::size_t pool_size, std::optional<std::size_t> own);
    std::size_t next();

private:
    std::mt19937_64 rng_;
    std::uniform_int_distribution<std::size_t> dist_;
    std::optional<std::size_t> own_;
};

/// True when a period can carry a meaningful test and a defined CTR:
/// non-constant x window with positive total.
bool is_testable(const PairPeriod& pp);

/// Single-period randomization test with an explicit seed.
/// Throws ArgumentError for an empty pool, R = 0 or a tau mismatch.
IndependenceResult randomization_pvalue(const PairPeriod& pp, const WindowPool& pool, std::size_t n_resamples,
                                        std::uint64_t seed);

/// Tests every period; result i belongs to periods[i] and uses
/// period_seed(base_seed, focal, target, period_index). `threads` <= 0 lets
/// OpenMP choose. Results do not depend on the thread count.
std::vector<IndependenceResult> randomization_pvalues(std::span<const PairPeriod> periods, const WindowPool& pool,
                                                      std::size_t n_resamples, std::uint64_t base_seed,
                                                      int threads = 0);

namespace reference {

/// Serial reference for randomization_pvalues(); kept for testing and benchmarking.
std::vector<IndependenceResult> randomization_pvalues(std::span<const PairPeriod> periods, const WindowPool& pool,
                                                      std::size_t n_resamples, std::uint64_t base_seed);

}  // namespace reference

}  // namespace splitdoor
