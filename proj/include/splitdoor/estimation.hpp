#pragma once

#include "splitdoor/core_data.hpp"
#include "splitdoor/discovery.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace splitdoor {

/// Total causal CTR of one focal product in one period: the sum of the
/// per-target CTRs of its accepted targets.
struct FocalEstimate {
    std::string focal_id;
    std::size_t period_index = 0;
    double rho_i_tau = 0.0;
    std::size_t n_targets = 0;
    double x_total = 0.0;  // focal visits in the window; weight for the traffic-weighted mean
};

struct EffectEstimate {
    double rho_hat = 0.0;
    double sigma_hat = 0.0;  // sample standard deviation of rho_i_tau (N - 1 divisor)
    std::size_t N = 0;
};

enum class Weighting { Unweighted, Traffic };

/// Groups instances by (focal_id, period_index) and sums their CTRs.
/// Output is sorted by (focal_id, period_index); throws DataError on empty input.
std::vector<FocalEstimate> aggregate_focal(std::span<const SplitDoorInstance> instances);

/// Mean over focal estimates (unweighted by default) and their spread.
std::vector<double> focal_rhos(std::span<const FocalEstimate> focals);
EffectEstimate mean_effect(std::span<const FocalEstimate> focals, Weighting weighting = Weighting::Unweighted);

/// Ratio of sums, sum(y_r) / sum(x), over every period given.
double naive_ctr(std::span<const PairPeriod> periods);
/// Mean of the per-period ratios over periods with positive x; diagnostic only.
double naive_ctr_mean_of_ratios(std::span<const PairPeriod> periods);

struct GroupEstimate {
    std::string group;
    std::size_t n_instances = 0;
    std::size_t n_focals = 0;  // distinct focal products
    EffectEstimate effect;
    double naive_ctr = 0.0;  // over all periods of the group's focal products
};

/// Per-group causal and naive CTR, keyed by the focal product's group
/// ("unknown" when unmapped), ordered by instance count descending then name.
std::vector<GroupEstimate> group_breakdown(std::span<const SplitDoorInstance> instances,
                                           std::span<const PairPeriod> periods,
                                           const std::map<std::string, std::string>& focal_groups);

}  // namespace splitdoor
