#include "splitdoor/sensitivity.hpp"

#include "splitdoor/csv.hpp"
#include "splitdoor/error.hpp"
#include "splitdoor/estimation.hpp"
#include "splitdoor/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <random>

#include <omp.h>

namespace splitdoor {

void SensitivityConfig::validate() const
{
    if (c1_grid.empty() || c2_grid.empty()) throw ArgumentError("sensitivity: grids must be nonempty");
    auto in_unit = [](double c) { return c >= -1.0 && c <= 1.0; };
    if (!std::all_of(c1_grid.begin(), c1_grid.end(), in_unit) ||
        !std::all_of(c2_grid.begin(), c2_grid.end(), in_unit)) {
        throw ArgumentError("sensitivity: grid values must lie in [-1, 1]");
    }
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ArgumentError("sensitivity: kappa must lie in [0, 1]");
}

namespace {

double mean(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void perturb_standardized(PairPeriod& pp, double c1, double c2, std::span<const double> v)
{
    const std::size_t n = pp.x.size();
    const double mx = mean(pp.x);
    const double my = mean(pp.y_r);
    double ss = 0.0;
    for (double a : pp.x) ss += (a - mx) * (a - mx);
    const double sx = std::sqrt(ss / static_cast<double>(n));

    std::vector<double> z(n), w(n);
    double zw = 0.0, zz = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        z[t] = (pp.x[t] - mx) / sx;
        w[t] = (pp.y_r[t] - my) / sx;
        zw += z[t] * w[t];
        zz += z[t] * z[t];
    }
    const double b = zw / zz;

    // Standardize the confound within the window: zero mean, unit variance and
    // orthogonal to z, so z' keeps unit variance and cov(z', v) = c1 exactly.
    std::vector<double> u(v.begin(), v.end());
    const double mu = mean(u);
    double zu = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        u[t] -= mu;
        zu += z[t] * u[t];
    }
    double uu = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        u[t] -= (zu / zz) * z[t];
        uu += u[t] * u[t];
    }
    const double su = std::sqrt(uu / static_cast<double>(n));
    for (auto& e : u) e = su > 1e-12 ? e / su : 0.0;  // no free direction left when n = 2

    const double a = std::sqrt(std::max(0.0, 1.0 - c1 * c1));
    for (std::size_t t = 0; t < n; ++t) {
        const double z_new = a * z[t] + c1 * u[t];
        const double w_new = w[t] + b * (z_new - z[t]) + c2 * u[t];
        pp.x[t] = mx + sx * z_new;
        pp.y_r[t] = my + sx * w_new;
    }
}

std::size_t perturb_raw(PairPeriod& pp, double c1, double c2, std::span<const double> v)
{
    std::size_t clipped = 0;
    auto clip = [&](double a) {
        if (a < 0.0) {
            ++clipped;
            return 0.0;
        }
        return a;
    };
    for (std::size_t t = 0; t < pp.x.size(); ++t) {
        pp.x[t] = clip(pp.x[t] + c1 * v[t]);
        pp.y_r[t] = clip(pp.y_r[t] + c2 * v[t]);
    }
    return clipped;
}

}  // namespace

Injection inject_confound(std::span<const SplitDoorInstance> instances, double c1, double c2, double kappa,
                          std::uint64_t seed, bool standardize)
{
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ArgumentError("inject_confound: kappa must lie in [0, 1]");
    if (standardize && !(c1 >= -1.0 && c1 <= 1.0)) {
        throw ArgumentError("inject_confound: standardized mode needs c1 in [-1, 1]");
    }
    Injection out;
    out.instances.assign(instances.begin(), instances.end());
    const std::size_t W = instances.size();
    const auto k = static_cast<std::size_t>(std::floor(kappa * static_cast<double>(W)));
    if (k == 0) return out;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(W);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v;
    for (std::size_t i : idx) {
        auto& inst = out.instances[i];
        auto& pp = inst.period;
        v.resize(pp.x.size());
        for (auto& a : v) a = normal(rng);
        if (standardize) {
            if (is_constant(pp.x)) continue;  // no scale to standardize by
            perturb_standardized(pp, c1, c2, v);
        } else {
            out.n_clipped += perturb_raw(pp, c1, c2, v);
        }
        ++out.n_perturbed;
        const double sx = pp.sum_x();
        if (sx > 0.0) {
            inst.rho_ij_tau = pp.sum_y_r() / sx;
        } else {
            inst.rho_ij_tau = 0.0;
            ++out.n_undefined;
        }
    }
    return out;
}

double ratio_estimator(std::span<const SplitDoorInstance> instances)
{
    const auto focals = aggregate_focal(instances);
    return mean_effect(focals).rho_hat;
}

double ols_slope(std::span<const double> x, std::span<const double> y)
{
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sxy += (x[t] - mx) * (y[t] - my);
        sxx += (x[t] - mx) * (x[t] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

double ols_slope_estimator(std::span<const SplitDoorInstance> instances)
{
    if (instances.empty()) throw DataError("no instances");
    double sum = 0.0;
    for (const auto& in : instances) sum += ols_slope(in.period.x, in.period.y_r);
    return sum / static_cast<double>(instances.size());
}

double linear_bias_prediction(double c1, double c2, double kappa)
{
    return kappa * c1 * c2;
}

SensitivitySurface sensitivity_surface(std::span<const SplitDoorInstance> instances, const SensitivityConfig& config,
                                       const Estimator& estimator, int threads)
{
    config.validate();
    if (instances.empty()) throw DataError("sensitivity: no instances");
    SensitivitySurface s;
    s.baseline = estimator(instances);

    const std::size_t n1 = config.c1_grid.size();
    const std::size_t n2 = config.c2_grid.size();
    s.cells.resize(n1 * n2);
    const int nt = threads > 0 ? threads : omp_get_max_threads();
    const auto cells = static_cast<std::ptrdiff_t>(n1 * n2);
    std::exception_ptr error;  // first failure inside the parallel region, rethrown after it
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (std::ptrdiff_t ci = 0; ci < cells; ++ci) {
        try {
            const auto i = static_cast<std::size_t>(ci) / n2;
            const auto j = static_cast<std::size_t>(ci) % n2;
            const double c1 = config.c1_grid[i];
            const double c2 = config.c2_grid[j];
            const auto seed = combine_seed(combine_seed(config.seed, i), j);
            const auto inj = inject_confound(instances, c1, c2, config.kappa, seed, config.standardize);
            auto& cell = s.cells[static_cast<std::size_t>(ci)];
            cell = {c1, c2, config.kappa, estimator(inj.instances) - s.baseline,
                    linear_bias_prediction(c1, c2, config.kappa), inj.n_clipped};
        } catch (...) {
#pragma omp critical(splitdoor_surface_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return s;
}

void write_surface_csv(std::ostream& out, std::span<const SurfaceCell> cells, bool header)
{
    if (header) out << "c1,c2,kappa,deviation,predicted_bias\n";
    for (const auto& c : cells) {
        csv::write_row(out, {csv::format_double(c.c1), csv::format_double(c.c2), csv::format_double(c.kappa),
                             csv::format_double(c.deviation), csv::format_double(c.predicted_bias)});
    }
}

}  // namespace splitdoor
