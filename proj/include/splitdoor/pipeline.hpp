#pragma once

// End-to-end run: ingest -> popularity filter -> slice -> constant-Y_D filter
// -> screen -> threshold -> estimate -> multiplicity -> interval -> report.

#include "splitdoor/core_data.hpp"
#include "splitdoor/discovery.hpp"
#include "splitdoor/estimation.hpp"
#include "splitdoor/multiplicity.hpp"
#include "splitdoor/sensitivity.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace splitdoor {

enum class InputFormat { Events, Panel };

std::optional<InputFormat> parse_input_format(std::string_view s);
std::string_view to_string(InputFormat f);

struct RunConfig {
    std::filesystem::path input;
    InputFormat format = InputFormat::Panel;
    std::size_t tau = kDefaultTau;
    double alpha = kDefaultAlpha;
    std::vector<double> sweep_alphas;  // alpha-sweep levels; empty for none
    std::size_t resamples = kDefaultResamples;
    std::uint64_t seed = 0;
    double min_peak = 10.0;
    PiEstimator pi_estimator = PiEstimator::Nettleton;
    std::size_t bins = kDefaultBins;
    double lambda = kDefaultStoreyLambda;
    double z = kDefaultZ;
    MaxsumMethod maxsum = MaxsumMethod::TopKExact;
    Weighting weighting = Weighting::Unweighted;
    bool sensitivity = false;
    std::vector<double> c_grid{-1.0, -0.5, 0.0, 0.5, 1.0};
    std::vector<double> kappas{1.0, 0.5};
    bool standardize = true;
    int threads = 0;
    std::filesystem::path out_dir;

    /// Throws ArgumentError for values outside their domains.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& c);

/// Everything derived from the screen at one significance level.
struct Estimates {
    double alpha = kDefaultAlpha;
    std::size_t m = 0;
    std::size_t W = 0;
    std::size_t unique_focals = 0;
    std::vector<FocalEstimate> focals;
    EffectEstimate effect;
    double naive = 0.0;
    double naive_mean_of_ratios = 0.0;
    MultiplicityReport multiplicity;
    double phi_prime_used = 0.0;  // phi' clamped to [0, 1] for the interval
    EffectInterval interval;
    std::vector<GroupEstimate> groups;
};

/// Estimation, multiplicity and interval from the discovery outputs.
/// `periods` are all periods that entered discovery, in canonical order.
/// Throws DataError("no discovered instances") when `instances` is empty.
Estimates estimate_all(std::span<const PairPeriod> periods, std::span<const double> p_values,
                       std::span<const SplitDoorInstance> instances, double alpha,
                       const std::map<std::string, std::string>& focal_groups, const RunConfig& config);

struct SweepRow {
    double alpha = 0.0;
    std::size_t W = 0;
    std::size_t unique_focals = 0;
    std::size_t N = 0;
    double phi = 0.0;
    double phi_prime = 0.0;
    double rho_hat = 0.0;
    double sigma_hat = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Re-thresholds one screen at every level; rows with W = 0 carry NaN estimates.
std::vector<SweepRow> alpha_sweep(const Screen& screen, std::span<const double> alphas, const RunConfig& config);

struct StageCounts {
    std::size_t rejected_rows = 0;
    std::size_t pairs_loaded = 0;
    std::size_t pairs_after_popularity = 0;
    std::size_t periods_sliced = 0;
    std::size_t periods_constant_direct = 0;
    std::size_t periods_degenerate_x = 0;
    std::size_t periods_zero_x = 0;
};

struct PipelineResult {
    StageCounts counts;
    std::vector<RowError> rejected;
    std::vector<PairPeriod> periods;  // entered discovery, canonical order
    std::map<std::string, std::string> focal_groups;
    Screen screen;
    DiscoveryRun run;
    Estimates estimates;
    std::vector<SweepRow> sweep;
    std::vector<SurfaceCell> surface;
    std::map<std::string, double> timing;  // seconds per stage
};

/// Loads the configured input file.
PanelLoad load_input(const RunConfig& config);

/// Runs every stage on an in-memory panel.
PipelineResult run_pipeline(const RunConfig& config, const DailyPanel& panel);

/// Loads, runs and writes all artifacts to config.out_dir. On failure writes a
/// report flagged incomplete and rethrows with the failing stage's name.
PipelineResult run_pipeline(const RunConfig& config);

/// Report without timing metadata is a pure function of config and input.
nlohmann::json report_json(const PipelineResult& result, const RunConfig& config);
nlohmann::json estimates_json(const Estimates& e);

void write_instances_csv(std::ostream& out, std::span<const SplitDoorInstance> instances);
/// One row per period that entered discovery, tested or not:
/// `focal_id,target_id,period_index,group,status,sum_x,sum_y_r,statistic,p_value`.
void write_pvalues_csv(std::ostream& out, const PipelineResult& result);
void write_groups_csv(std::ostream& out, std::span<const GroupEstimate> groups);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_histogram_csv(std::ostream& out, std::span<const double> p_values, std::size_t bins);

/// Writes every artifact of a finished run into `dir`.
void write_outputs(const std::filesystem::path& dir, const PipelineResult& result, const RunConfig& config);

/// Rebuilds the estimate section of a report from `pvalues.csv` and
/// `instances.csv` of a previous run.
Estimates recompute_estimates(std::istream& pvalues_csv, std::istream& instances_csv, const RunConfig& config);

}  // namespace splitdoor
