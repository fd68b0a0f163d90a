#include "splitdoor/estimation.hpp"

#include "splitdoor/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace splitdoor {

std::vector<FocalEstimate> aggregate_focal(std::span<const SplitDoorInstance> instances)
{
    if (instances.empty()) throw DataError("no discovered instances to aggregate");

    std::vector<const SplitDoorInstance*> order;
    order.reserve(instances.size());
    for (const auto& in : instances) order.push_back(&in);
    std::sort(order.begin(), order.end(), [](const SplitDoorInstance* l, const SplitDoorInstance* r) {
        return std::tie(l->period.focal_id, l->period.period_index, l->period.target_id) <
               std::tie(r->period.focal_id, r->period.period_index, r->period.target_id);
    });

    std::vector<FocalEstimate> out;
    for (const auto* in : order) {
        const auto& pp = in->period;
        if (out.empty() || out.back().focal_id != pp.focal_id || out.back().period_index != pp.period_index) {
            out.push_back({pp.focal_id, pp.period_index, 0.0, 0, pp.sum_x()});
        }
        out.back().rho_i_tau += in->rho_ij_tau;
        ++out.back().n_targets;
    }
    return out;
}

std::vector<double> focal_rhos(std::span<const FocalEstimate> focals)
{
    std::vector<double> v;
    v.reserve(focals.size());
    for (const auto& f : focals) v.push_back(f.rho_i_tau);
    return v;
}

EffectEstimate mean_effect(std::span<const FocalEstimate> focals, Weighting weighting)
{
    if (focals.empty()) throw DataError("no focal estimates");

    std::vector<const FocalEstimate*> order;
    for (const auto& f : focals) order.push_back(&f);
    std::sort(order.begin(), order.end(), [](const FocalEstimate* l, const FocalEstimate* r) {
        return std::tie(l->focal_id, l->period_index, l->rho_i_tau) < std::tie(r->focal_id, r->period_index, r->rho_i_tau);
    });

    EffectEstimate e;
    e.N = order.size();
    const auto n = static_cast<double>(e.N);
    double wsum = 0.0;
    double sum = 0.0;
    for (const auto* f : order) {
        const double w = weighting == Weighting::Traffic ? f->x_total : 1.0;
        wsum += w;
        sum += w * f->rho_i_tau;
    }
    if (!(wsum > 0.0)) throw DataError("mean_effect: total weight is zero");
    e.rho_hat = sum / wsum;
    if (e.N > 1) {
        double ss = 0.0;
        for (const auto* f : order) {
            const double w = weighting == Weighting::Traffic ? f->x_total * n / wsum : 1.0;
            const double d = f->rho_i_tau - e.rho_hat;
            ss += w * d * d;
        }
        e.sigma_hat = std::sqrt(ss / (n - 1.0));
    }
    return e;
}

double naive_ctr(std::span<const PairPeriod> periods)
{
    double yr = 0.0;
    double x = 0.0;
    for (const auto& p : periods) {
        yr += p.sum_y_r();
        x += p.sum_x();
    }
    if (!(x > 0.0)) throw DataError("naive CTR undefined: total focal traffic is zero");
    return yr / x;
}

double naive_ctr_mean_of_ratios(std::span<const PairPeriod> periods)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : periods) {
        const double x = p.sum_x();
        if (x > 0.0) {
            sum += p.sum_y_r() / x;
            ++n;
        }
    }
    if (n == 0) throw DataError("naive CTR undefined: total focal traffic is zero");
    return sum / static_cast<double>(n);
}

std::vector<GroupEstimate> group_breakdown(std::span<const SplitDoorInstance> instances,
                                           std::span<const PairPeriod> periods,
                                           const std::map<std::string, std::string>& focal_groups)
{
    auto group_of = [&](const std::string& focal) {
        auto it = focal_groups.find(focal);
        return it == focal_groups.end() ? std::string("unknown") : it->second;
    };

    std::map<std::string, std::vector<SplitDoorInstance>> by_group;
    for (const auto& in : instances) by_group[group_of(in.period.focal_id)].push_back(in);
    std::map<std::string, std::vector<PairPeriod>> periods_by_group;
    for (const auto& p : periods) {
        auto g = group_of(p.focal_id);
        if (by_group.contains(g)) periods_by_group[g].push_back(p);
    }

    std::vector<GroupEstimate> out;
    for (const auto& [g, ins] : by_group) {
        GroupEstimate ge;
        ge.group = g;
        ge.n_instances = ins.size();
        std::set<std::string> focals;
        for (const auto& in : ins) focals.insert(in.period.focal_id);
        ge.n_focals = focals.size();
        const auto agg = aggregate_focal(ins);
        ge.effect = mean_effect(agg);
        const auto& gp = periods_by_group[g];
        double yr = 0.0, x = 0.0;
        for (const auto& p : gp) {
            yr += p.sum_y_r();
            x += p.sum_x();
        }
        ge.naive_ctr = x > 0.0 ? yr / x : 0.0;
        out.push_back(std::move(ge));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GroupEstimate& l, const GroupEstimate& r) { return l.n_instances > r.n_instances; });
    return out;
}

}  // namespace splitdoor
