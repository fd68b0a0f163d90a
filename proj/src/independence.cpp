#include "splitdoor/independence.hpp"

#include "splitdoor/error.hpp"
#include "splitdoor/seeding.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace splitdoor {

namespace {

// Four independent accumulators, combined in a fixed order.
double dot(const double* a, const double* b, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

CenteredDistances::CenteredDistances(std::span<const double> v) : n_(v.size())
{
    const std::size_t n = n_;
    std::vector<double> row_mean(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += std::abs(v[k] - v[l]);
        row_mean[k] = s / static_cast<double>(n);
    }
    double grand = 0.0;
    for (double r : row_mean) grand += r;
    grand /= static_cast<double>(n);

    diag_.resize(n);
    upper_.reserve(n * (n - 1) / 2);
    for (std::size_t k = 0; k < n; ++k) {
        diag_[k] = -2.0 * row_mean[k] + grand;
        for (std::size_t l = k + 1; l < n; ++l) {
            upper_.push_back(std::abs(v[k] - v[l]) - row_mean[k] - row_mean[l] + grand);
        }
    }
    self_ = inner(*this, *this);
}

double inner(const CenteredDistances& a, const CenteredDistances& b)
{
    const double d = dot(a.diag_.data(), b.diag_.data(), a.n_);
    const double u = dot(a.upper_.data(), b.upper_.data(), a.upper_.size());
    return d + 2.0 * u;
}

double distance_correlation(const CenteredDistances& a, const CenteredDistances& b)
{
    const double vx = a.self_inner();
    const double vy = b.self_inner();
    if (!(vx > 0.0) || !(vy > 0.0)) return 0.0;
    // The 1/n^2 factors of dCov^2 and dVar^2 cancel in the ratio.
    const double r2 = inner(a, b) / std::sqrt(vx * vy);
    return std::sqrt(std::clamp(r2, 0.0, 1.0));
}

double distance_correlation(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw ArgumentError("distance_correlation: vectors differ in length");
    if (x.size() < 2) throw ArgumentError("distance_correlation: need at least 2 observations");
    return distance_correlation(CenteredDistances(x), CenteredDistances(y));
}

double resampling_pvalue(double observed, std::span<const double> null_stats)
{
    const auto hits = std::count_if(null_stats.begin(), null_stats.end(), [&](double s) { return s >= observed; });
    return (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(null_stats.size()));
}

void WindowPool::add(std::vector<double> window)
{
    if (!windows_.empty() && window.size() != tau()) throw ArgumentError("WindowPool: window length mismatch");
    windows_.push_back(std::move(window));
}

void WindowPool::add(const std::string& focal_id, std::size_t period_index, std::vector<double> window)
{
    if (index_.contains({focal_id, period_index})) return;
    add(std::move(window));
    index_.emplace(std::make_pair(focal_id, period_index), windows_.size() - 1);
}

WindowPool WindowPool::from_periods(std::span<const PairPeriod> periods)
{
    WindowPool pool;
    for (const auto& p : periods) {
        if (is_testable(p)) pool.add(p.focal_id, p.period_index, p.x);
    }
    return pool;
}

std::optional<std::size_t> WindowPool::index_of(const std::string& focal_id, std::size_t period_index) const
{
    auto it = index_.find({focal_id, period_index});
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NullDraws::NullDraws(std::uint64_t seed, std::size_t pool_size, std::optional<std::size_t> own)
    : rng_(seed), own_(pool_size > 1 ? own : std::nullopt)
{
    const std::size_t span = own_ ? pool_size - 2 : pool_size - 1;
    dist_ = std::uniform_int_distribution<std::size_t>(0, span);
}

std::size_t NullDraws::next()
{
    std::size_t i = dist_(rng_);
    if (own_ && i >= *own_) ++i;
    return i;
}

bool is_testable(const PairPeriod& pp)
{
    return !is_constant(pp.x) && pp.sum_x() > 0.0;
}

namespace {

void check_pool(const PairPeriod& pp, const WindowPool& pool, std::size_t n_resamples)
{
    if (pool.empty()) throw ArgumentError("randomization test: empty null pool");
    if (n_resamples == 0) throw ArgumentError("randomization test: need at least one resample");
    if (pool.tau() != pp.x.size() || pp.y_d.size() != pp.x.size()) {
        throw ArgumentError("randomization test: window length differs from pool");
    }
}

}  // namespace

IndependenceResult randomization_pvalue(const PairPeriod& pp, const WindowPool& pool, std::size_t n_resamples,
                                        std::uint64_t seed)
{
    check_pool(pp, pool, n_resamples);
    IndependenceResult r;
    r.n_resamples = n_resamples;
    r.seed = seed;
    r.degenerate = is_constant(pp.x) || is_constant(pp.y_d);

    const CenteredDistances yd(pp.y_d);
    r.statistic = distance_correlation(CenteredDistances(pp.x), yd);
    if (r.statistic == 0.0) return r;  // every null statistic ties or exceeds 0

    NullDraws draws(seed, pool.size(), pool.index_of(pp.focal_id, pp.period_index));
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n_resamples; ++k) {
        if (distance_correlation(CenteredDistances(pool.window(draws.next())), yd) >= r.statistic) ++hits;
    }
    r.p_value = (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(n_resamples));
    return r;
}

std::vector<IndependenceResult> randomization_pvalues(std::span<const PairPeriod> periods, const WindowPool& pool,
                                                      std::size_t n_resamples, std::uint64_t base_seed, int threads)
{
    for (const auto& pp : periods) check_pool(pp, pool, n_resamples);
    const int nt = threads > 0 ? threads : omp_get_max_threads();

    std::vector<CenteredDistances> centered(pool.size());
    const auto pool_n = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t i = 0; i < pool_n; ++i) {
        centered[static_cast<std::size_t>(i)] = CenteredDistances(pool.window(static_cast<std::size_t>(i)));
    }

    std::vector<IndependenceResult> out(periods.size());
    const auto n = static_cast<std::ptrdiff_t>(periods.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& pp = periods[static_cast<std::size_t>(i)];
        auto& r = out[static_cast<std::size_t>(i)];
        r.period = static_cast<std::size_t>(i);
        r.n_resamples = n_resamples;
        r.seed = period_seed(base_seed, pp.focal_id, pp.target_id, pp.period_index);
        r.degenerate = is_constant(pp.x) || is_constant(pp.y_d);

        const CenteredDistances yd(pp.y_d);
        r.statistic = distance_correlation(CenteredDistances(pp.x), yd);
        if (r.statistic == 0.0) {
            r.p_value = 1.0;
            continue;
        }
        NullDraws draws(r.seed, pool.size(), pool.index_of(pp.focal_id, pp.period_index));
        std::size_t hits = 0;
        for (std::size_t k = 0; k < n_resamples; ++k) {
            if (distance_correlation(centered[draws.next()], yd) >= r.statistic) ++hits;
        }
        r.p_value = (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(n_resamples));
    }
    return out;
}

}  // namespace splitdoor
