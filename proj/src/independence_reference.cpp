#include "splitdoor/independence.hpp"

#include "splitdoor/seeding.hpp"

namespace splitdoor::reference {

std::vector<IndependenceResult> randomization_pvalues(std::span<const PairPeriod> periods, const WindowPool& pool,
                                                      std::size_t n_resamples, std::uint64_t base_seed)
{
    std::vector<IndependenceResult> out;
    out.reserve(periods.size());
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto& pp = periods[i];
        auto r = randomization_pvalue(pp, pool, n_resamples,
                                      period_seed(base_seed, pp.focal_id, pp.target_id, pp.period_index));
        r.period = i;
        out.push_back(r);
    }
    return out;
}

}  // namespace splitdoor::reference
