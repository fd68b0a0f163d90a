#include "splitdoor/multiplicity.hpp"

#include "splitdoor/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace splitdoor {

namespace {

double pi_at(std::span<const double> p_values, double lambda)
{
    const auto above = std::count_if(p_values.begin(), p_values.end(), [&](double p) { return p > lambda; });
    const double pi = static_cast<double>(above) / (static_cast<double>(p_values.size()) * (1.0 - lambda));
    return std::clamp(pi, 0.0, 1.0);
}

}  // namespace

double storey_pi_indep(std::span<const double> p_values, double lambda)
{
    if (p_values.empty()) throw ArgumentError("storey_pi_indep: no p-values");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw ArgumentError("storey_pi_indep: lambda must lie in [0, 1)");
    return pi_at(p_values, lambda);
}

std::vector<std::size_t> pvalue_histogram(std::span<const double> p_values, std::size_t bins)
{
    if (bins < 2) throw ArgumentError("need at least 2 histogram bins");
    std::vector<std::size_t> counts(bins, 0);
    for (double p : p_values) {
        auto b = static_cast<std::size_t>(std::floor(std::clamp(p, 0.0, 1.0) * static_cast<double>(bins)));
        ++counts[std::min(b, bins - 1)];
    }
    return counts;
}

NettletonEstimate nettleton_pi_indep(std::span<const double> p_values, std::size_t bins)
{
    if (bins < 2) throw ArgumentError("nettleton_pi_indep: need at least 2 bins");
    if (p_values.empty()) throw ArgumentError("nettleton_pi_indep: no p-values");
    const auto counts = pvalue_histogram(p_values, bins);

    std::size_t chosen = bins;  // 1-based; the last bin when none qualifies earlier
    std::size_t right = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i + 1 < bins; ++i) {
        right -= counts[i];
        // count[I] <= right_sum / n_right, compared in integers
        if (counts[i] * (bins - i - 1) <= right) {
            chosen = i + 1;
            break;
        }
    }
    NettletonEstimate e;
    e.bin = chosen;
    e.lambda = static_cast<double>(chosen - 1) / static_cast<double>(bins);
    e.pi_indep = pi_at(p_values, e.lambda);
    return e;
}

double fndr_bound(double alpha, double pi_dep, std::size_t m, std::size_t W)
{
    if (W == 0) throw DataError("no discovered instances");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("fndr_bound: alpha must lie in (0, 1)");
    if (!(pi_dep >= 0.0 && pi_dep <= 1.0)) throw ArgumentError("fndr_bound: pi_dep must lie in [0, 1]");
    return (1.0 - alpha) * pi_dep * static_cast<double>(m) / static_cast<double>(W);
}

double phi_prime(double phi, std::size_t W, std::size_t N)
{
    if (N == 0) throw DataError("no focal estimates");
    return phi * static_cast<double>(W) / static_cast<double>(N);
}

std::string_view to_string(PiEstimator e)
{
    return e == PiEstimator::Nettleton ? "nettleton" : "storey";
}

std::string_view to_string(MaxsumMethod m)
{
    return m == MaxsumMethod::TopKExact ? "topk_exact" : "mean_approx";
}

MultiplicityReport assess_multiplicity(std::span<const double> p_values, double alpha, std::size_t W, std::size_t N,
                                       PiEstimator chosen, std::size_t bins, double lambda)
{
    MultiplicityReport r;
    r.lambda_storey = lambda;
    r.pi_indep_storey = storey_pi_indep(p_values, lambda);
    const auto net = nettleton_pi_indep(p_values, bins);
    r.bins = bins;
    r.pi_indep_nettleton = net.pi_indep;
    r.lambda_nettleton = net.lambda;
    r.chosen = chosen;
    r.pi_dep = 1.0 - (chosen == PiEstimator::Nettleton ? r.pi_indep_nettleton : r.pi_indep_storey);
    r.phi = fndr_bound(alpha, r.pi_dep, p_values.size(), W);
    r.phi_prime = phi_prime(r.phi, W, N);
    return r;
}

double rho_maxsum(std::span<const double> focal_rhos, double phi_prime, MaxsumMethod method)
{
    const auto n = static_cast<double>(focal_rhos.size());
    if (method == MaxsumMethod::MeanApprox) {
        const double mean = std::accumulate(focal_rhos.begin(), focal_rhos.end(), 0.0) / n;
        return phi_prime * n * mean;
    }
    // Guard against phi' N landing a rounding error above an integer.
    const double kf = std::ceil(phi_prime * n - 1e-9);
    const auto k = std::min(focal_rhos.size(), static_cast<std::size_t>(std::max(kf, 0.0)));
    std::vector<double> sorted(focal_rhos.begin(), focal_rhos.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>{});
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
    return sum;
}

EffectInterval effect_interval(std::span<const double> focal_rhos, double phi_prime, double z, MaxsumMethod method)
{
    if (focal_rhos.empty()) throw DataError("effect_interval: no focal estimates");
    if (!(phi_prime >= 0.0 && phi_prime <= 1.0)) throw ArgumentError("effect_interval: phi' must lie in [0, 1]");
    EffectInterval iv;
    iv.z = z;
    iv.method = method;
    const auto n = static_cast<double>(focal_rhos.size());
    iv.rho_hat = std::accumulate(focal_rhos.begin(), focal_rhos.end(), 0.0) / n;
    if (focal_rhos.size() > 1) {
        double ss = 0.0;
        for (double r : focal_rhos) ss += (r - iv.rho_hat) * (r - iv.rho_hat);
        iv.sigma_hat = std::sqrt(ss / (n - 1.0));
    }
    iv.rho_maxsum = rho_maxsum(focal_rhos, phi_prime, method);
    const double half = z * iv.sigma_hat / std::sqrt(n);
    iv.lower = iv.rho_hat - iv.rho_maxsum / n - half;
    iv.upper = iv.rho_hat + half;
    return iv;
}

}  // namespace splitdoor
