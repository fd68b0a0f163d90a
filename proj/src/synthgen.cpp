#include "splitdoor/synthgen.hpp"

#include "splitdoor/csv.hpp"
#include "splitdoor/error.hpp"
#include "splitdoor/seeding.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <omp.h>

namespace splitdoor {

void GeneratorParams::validate() const
{
    if (noise_sd_x < 0 || noise_sd_yr < 0 || noise_sd_yd < 0 || u_y_sd < 0) {
        throw ArgumentError("generator: standard deviations must be nonnegative");
    }
    if (!(confounded_fraction >= 0.0 && confounded_fraction <= 1.0)) {
        throw ArgumentError("generator: confounded_fraction must lie in [0, 1]");
    }
    if (!(u_y_ar > -1.0 && u_y_ar < 1.0)) throw ArgumentError("generator: u_y_ar must lie in (-1, 1)");
    if (n_pairs < 1) throw ArgumentError("generator: need at least one pair");
    if (n_days < 2) throw ArgumentError("generator: need at least two days");
}

double theoretical_cov(const GeneratorParams& p)
{
    return p.gamma1 * p.gamma3 * p.u_y_sd * p.u_y_sd;
}

namespace {

std::string product_id(const std::string& prefix, char kind, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%06zu", kind, i);
    return prefix + buf;
}

// Standardized log-normal: mean 0, variance 1.
double standard_lognormal(double z)
{
    const double e = std::exp(1.0);
    return (std::exp(z) - std::sqrt(e)) / std::sqrt((e - 1.0) * e);
}

}  // namespace

SyntheticPanel generate_panel(const GeneratorParams& params, int threads)
{
    params.validate();
    const std::size_t n_pairs = params.n_pairs;
    const std::size_t n_days = params.n_days;
    // Exactly round(fraction * n) pairs are confounded: the first ones.
    const auto n_confounded =
        static_cast<std::size_t>(std::llround(params.confounded_fraction * static_cast<double>(n_pairs)));

    SyntheticPanel out;
    out.panel.start = params.start;
    out.panel.n_days = n_days;
    out.panel.pairs.resize(n_pairs);
    out.truth.resize(n_pairs);
    std::vector<std::size_t> floored(n_pairs, 0);

    const int nt = threads > 0 ? threads : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(n_pairs);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        std::mt19937_64 rng(combine_seed(params.seed, i));
        std::normal_distribution<double> normal(0.0, 1.0);
        const bool confounded = i < n_confounded;
        const double g1 = confounded ? params.gamma1 : 0.0;
        const double g2 = confounded ? params.gamma2 : 0.0;
        const double innov = std::sqrt(1.0 - params.u_y_ar * params.u_y_ar);

        auto& ps = out.panel.pairs[i];
        ps.focal_id = product_id(params.id_prefix, 'f', i);
        ps.target_id = product_id(params.id_prefix, 't', i);
        ps.x.resize(n_days);
        ps.y_r.resize(n_days);
        ps.y_d.resize(n_days);
        out.truth[i] = {ps.focal_id, ps.target_id, confounded, params.rho};

        auto floor0 = [&](double v) {
            if (v < 0.0) {
                ++floored[i];
                return 0.0;
            }
            return v;
        };
        double shock = normal(rng);  // stationary start of the AR(1) latent
        for (std::size_t t = 0; t < n_days; ++t) {
            if (t > 0) shock = params.u_y_ar * shock + innov * normal(rng);
            const double u_x = normal(rng);
            const double e_x = params.noise_sd_x * normal(rng);
            const double e_yr = params.noise_sd_yr * normal(rng);
            const double e_yd = params.noise_sd_yd * normal(rng);
            const double unit = params.u_y_shape == LatentShape::LogNormal ? standard_lognormal(shock) : shock;
            const double u_y = params.u_y_mean + params.u_y_sd * unit;

            const double x = floor0(params.base_x + params.eta * u_x + g1 * u_y + e_x);
            ps.x[t] = x;
            ps.y_r[t] = floor0(params.rho * x + g2 * u_y + e_yr);
            ps.y_d[t] = floor0(params.base_yd + params.gamma3 * u_y + e_yd);
        }
    }

    if (!params.group.empty()) {
        for (const auto& ps : out.panel.pairs) {
            out.panel.groups[ps.focal_id] = params.group;
            out.panel.groups[ps.target_id] = params.group;
        }
    }
    for (auto f : floored) out.n_floored += f;
    out.floor_rate = static_cast<double>(out.n_floored) / static_cast<double>(3 * n_pairs * n_days);
    return out;
}

void write_truth_csv(std::ostream& out, const std::vector<PairTruth>& truth)
{
    out << "focal_id,target_id,confounded,true_rho\n";
    for (const auto& t : truth) {
        csv::write_row(out, {t.focal_id, t.target_id, t.confounded ? "1" : "0", csv::format_double(t.true_rho)});
    }
}

}  // namespace splitdoor
