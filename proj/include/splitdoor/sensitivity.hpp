#pragma once

// Sensitivity of the effect estimate to a hidden confound V that moves both
// the treatment X and the referred outcome Y_R but not Y_D. A fraction kappa
// of instances gets x <- x + c1 v, y_r <- y_r + c2 v with v ~ N(0, 1) per day.
//
// Standardized mode works on copies where x has zero mean and unit variance
// (y_r is centered and divided by the same scale, which keeps slopes in CTR
// units):
//   z' = sqrt(1 - c1^2) z + c1 v          (treatment keeps unit variance)
//   w' = w + b (z' - z) + c2 v            (b = the instance's own slope)
// and maps back to the original scale. Here v is the drawn noise re-standardized
// within the window (zero mean, unit variance, orthogonal to z), so the window
// meets the model's moment conditions exactly. The referred outcome thus follows the
// shifted treatment through the causal channel, so an OLS slope moves by
// c1 c2 in expectation. Raw mode adds c1 v and c2 v to the counts directly
// and clips negatives at 0, which attenuates the bias.

#include "splitdoor/discovery.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace splitdoor {

struct SensitivityConfig {
    std::vector<double> c1_grid{-1.0, -0.5, 0.0, 0.5, 1.0};
    std::vector<double> c2_grid{-1.0, -0.5, 0.0, 0.5, 1.0};
    double kappa = 1.0;
    std::uint64_t seed = 0;
    bool standardize = true;

    void validate() const;
};

struct Injection {
    std::vector<SplitDoorInstance> instances;
    std::size_t n_perturbed = 0;
    std::size_t n_clipped = 0;    // raw mode: values clipped at 0
    std::size_t n_undefined = 0;  // instances whose perturbed sum(x) <= 0 (CTR set to 0)
};

/// Perturbs floor(kappa * W) instances chosen uniformly without replacement.
/// y_d windows are never touched. Deterministic given the seed.
Injection inject_confound(std::span<const SplitDoorInstance> instances, double c1, double c2, double kappa,
                          std::uint64_t seed, bool standardize = true);

using Estimator = std::function<double(std::span<const SplitDoorInstance>)>;

/// The pipeline estimate: mean over focal-periods of summed per-target CTRs.
double ratio_estimator(std::span<const SplitDoorInstance> instances);

/// Mean over instances of the least-squares slope of y_r on x (with intercept).
double ols_slope_estimator(std::span<const SplitDoorInstance> instances);

double ols_slope(std::span<const double> x, std::span<const double> y);

/// kappa c1 c2: the additive bias of an OLS slope under the standardized
/// linear model.
double linear_bias_prediction(double c1, double c2, double kappa);

struct SurfaceCell {
    double c1 = 0.0;
    double c2 = 0.0;
    double kappa = 0.0;
    double deviation = 0.0;  // perturbed estimate minus original estimate
    double predicted_bias = 0.0;
    std::size_t n_clipped = 0;
};

struct SensitivitySurface {
    double baseline = 0.0;
    std::vector<SurfaceCell> cells;  // c1-major order
};

/// One injection per grid cell, seeded from (seed, c1 index, c2 index).
SensitivitySurface sensitivity_surface(std::span<const SplitDoorInstance> instances, const SensitivityConfig& config,
                                       const Estimator& estimator = ratio_estimator, int threads = 0);

/// `c1,c2,kappa,deviation,predicted_bias`
void write_surface_csv(std::ostream& out, std::span<const SurfaceCell> cells, bool header = true);

}  // namespace splitdoor
