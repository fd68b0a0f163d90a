#pragma once

// Error from mass testing: the share of truly independent pairs (two
// estimators), the false non-discovery rate bound on accepted instances, and
// the asymmetric interval for the mean effect.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace splitdoor {

inline constexpr double kDefaultStoreyLambda = 0.5;
inline constexpr std::size_t kDefaultBins = 20;
inline constexpr double kDefaultZ = 2.58;

/// W_lambda / (m (1 - lambda)) with W_lambda = #{p > lambda}, clamped to [0, 1].
double storey_pi_indep(std::span<const double> p_values, double lambda = kDefaultStoreyLambda);

struct NettletonEstimate {
    double pi_indep = 1.0;
    double lambda = 0.0;
    std::size_t bin = 1;  // 1-based index I of the chosen bin
};

/// Histogram counts over B equal-width bins of [0, 1]; the last bin is closed.
std::vector<std::size_t> pvalue_histogram(std::span<const double> p_values, std::size_t bins = kDefaultBins);

/// Adaptive lambda: the left-most bin whose count does not exceed the mean
/// count of the bins to its right sets lambda = (I - 1) / B.
NettletonEstimate nettleton_pi_indep(std::span<const double> p_values, std::size_t bins = kDefaultBins);

/// (1 - alpha) pi_dep m / W. Throws DataError("no discovered instances") when W = 0.
double fndr_bound(double alpha, double pi_dep, std::size_t m, std::size_t W);

/// Expected share of invalid focal estimates, phi * W / N.
double phi_prime(double phi, std::size_t W, std::size_t N);

enum class PiEstimator { Nettleton, Storey };
enum class MaxsumMethod { TopKExact, MeanApprox };

std::string_view to_string(PiEstimator e);
std::string_view to_string(MaxsumMethod m);

struct MultiplicityReport {
    double pi_indep_storey = 1.0;
    double pi_indep_nettleton = 1.0;
    double lambda_storey = kDefaultStoreyLambda;
    double lambda_nettleton = 0.0;
    std::size_t bins = kDefaultBins;
    PiEstimator chosen = PiEstimator::Nettleton;
    double pi_dep = 0.0;
    double phi = 0.0;
    double phi_prime = 0.0;
};

/// Both pi estimators, and the FNDR bound using the chosen one.
MultiplicityReport assess_multiplicity(std::span<const double> p_values, double alpha, std::size_t W, std::size_t N,
                                       PiEstimator chosen = PiEstimator::Nettleton, std::size_t bins = kDefaultBins,
                                       double lambda = kDefaultStoreyLambda);

struct EffectInterval {
    double lower = 0.0;
    double upper = 0.0;
    double rho_hat = 0.0;
    double sigma_hat = 0.0;
    double rho_maxsum = 0.0;
    double z = kDefaultZ;
    MaxsumMethod method = MaxsumMethod::TopKExact;
};

/// Sum of the k = ceil(phi_prime N) largest values (TopKExact) or
/// phi_prime N mean (MeanApprox).
double rho_maxsum(std::span<const double> focal_rhos, double phi_prime, MaxsumMethod method);

/// (mean - maxsum/N - z sigma/sqrt(N), mean + z sigma/sqrt(N)), with sigma the
/// sample standard deviation. Throws DataError when N = 0 and ArgumentError
/// when phi_prime is outside [0, 1].
EffectInterval effect_interval(std::span<const double> focal_rhos, double phi_prime, double z = kDefaultZ,
                               MaxsumMethod method = MaxsumMethod::TopKExact);

}  // namespace splitdoor
