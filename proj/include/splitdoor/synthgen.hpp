#pragma once

// Linear structural-equation generator with known ground truth:
//
//   x   = base_x  + eta * u_x + gamma1' * u_y + e_x
//   y_r = rho * x          + gamma2' * u_y + e_yr
//   y_d = base_yd          + gamma3  * u_y + e_yd
//
// where (gamma1', gamma2') = (gamma1, gamma2) on the confounded share of
// pairs and 0 elsewhere. Every pair gets its own focal and target product.

#include "splitdoor/core_data.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace splitdoor {

enum class LatentShape { Gaussian, LogNormal };

struct GeneratorParams {
    double rho = 0.05;
    double eta = 5.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 5.0;
    double noise_sd_x = 2.0;
    double noise_sd_yr = 1.0;
    double noise_sd_yd = 1.0;
    double u_y_mean = 0.0;  // mean level of the shared demand shock
    double u_y_sd = 1.0;
    double base_x = 100.0;
    double base_yd = 50.0;
    LatentShape u_y_shape = LatentShape::Gaussian;
    double u_y_ar = 0.0;  // AR(1) coefficient of u_y across days, in (-1, 1)
    std::size_t n_pairs = 100;
    std::size_t n_days = 90;
    double confounded_fraction = 0.0;
    std::uint64_t seed = 1;
    Date start = Date{std::chrono::year{2020} / 1 / 1};
    std::string id_prefix;  // prepended to generated product ids
    std::string group;      // group label for every generated product; empty for none

    void validate() const;
};

struct PairTruth {
    std::string focal_id;
    std::string target_id;
    bool confounded = false;
    double true_rho = 0.0;
};

struct SyntheticPanel {
    DailyPanel panel;
    std::vector<PairTruth> truth;  // same order as panel.pairs
    std::size_t n_floored = 0;     // values raised to 0
    double floor_rate = 0.0;       // n_floored / all generated values
};

/// Deterministic given params.seed, whatever the thread count.
SyntheticPanel generate_panel(const GeneratorParams& params, int threads = 0);

/// gamma1 * gamma3 * Var(U_Y): population Cov(x, y_d) on a confounded pair.
double theoretical_cov(const GeneratorParams& params);

/// `focal_id,target_id,confounded,true_rho`
void write_truth_csv(std::ostream& out, const std::vector<PairTruth>& truth);

}  // namespace splitdoor
