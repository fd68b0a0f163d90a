#include "splitdoor/csv.hpp"
#include "splitdoor/error.hpp"
#include "splitdoor/pipeline.hpp"
#include "splitdoor/synthgen.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace fs = std::filesystem;
using namespace splitdoor;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

std::ofstream open_out(const fs::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    return out;
}

void print_summary(const Estimates& e)
{
    std::printf("m=%zu  W=%zu  N=%zu  unique focals=%zu\n", e.m, e.W, e.effect.N, e.unique_focals);
    std::printf("causal CTR  %.6f  (sd %.6f)\n", e.effect.rho_hat, e.effect.sigma_hat);
    std::printf("interval    [%.6f, %.6f]  phi=%.4f  phi'=%.4f\n", e.interval.lower, e.interval.upper,
                e.multiplicity.phi, e.multiplicity.phi_prime);
    std::printf("naive CTR   %.6f\n", e.naive);
}

// Prepare and screen only; writes instances.csv, pvalues.csv and discovery.json.
void run_discover(const RunConfig& config)
{
    config.validate();
    auto load = load_input(config);
    PipelineResult r;
    r.focal_groups = load.panel.groups;
    r.rejected = std::move(load.rejected);
    auto sliced = slice_periods(apply_popularity_filter(load.panel, config.min_peak), config.tau);
    auto filtered = filter_constant_direct(std::move(sliced));
    r.periods = std::move(filtered.periods);
    r.screen = screen_periods(r.periods, config.resamples, config.seed, config.threads);
    r.run = threshold(r.screen, config.alpha);

    fs::create_directories(config.out_dir);
    {
        auto o = open_out(config.out_dir / "instances.csv");
        write_instances_csv(o, r.run.instances);
    }
    {
        auto o = open_out(config.out_dir / "pvalues.csv");
        write_pvalues_csv(o, r);
    }
    nlohmann::json j{{"config", to_json(config)},
                     {"rejected_rows", r.rejected.size()},
                     {"periods", r.periods.size()},
                     {"periods_constant_direct", filtered.removed},
                     {"periods_degenerate_x", r.run.excluded_degenerate_x},
                     {"periods_zero_x", r.run.excluded_zero_x},
                     {"m", r.run.m},
                     {"W", r.run.W}};
    auto o = open_out(config.out_dir / "discovery.json");
    o << j.dump(2) << '\n';
    std::printf("m=%zu  W=%zu\n", r.run.m, r.run.W);
}

void run_report(const fs::path& run_dir, const RunConfig& config)
{
    std::ifstream pv(run_dir / "pvalues.csv", std::ios::binary);
    std::ifstream in(run_dir / "instances.csv", std::ios::binary);
    if (!pv || !in) throw DataError("run directory must hold pvalues.csv and instances.csv");
    const auto e = recompute_estimates(pv, in, config);
    const auto j = estimates_json(e);
    if (!config.out_dir.empty()) {
        fs::create_directories(config.out_dir);
        auto o = open_out(config.out_dir / "estimate.json");
        o << j.dump(2) << '\n';
    }
    std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Split-door causal effect estimation for time-series panels"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");

    RunConfig config;
    std::string input, out, format = "panel", pi = "nettleton", maxsum = "topk", weighting = "unweighted";
    auto* g = app.add_option_group("Pipeline");
    g->add_option("--input", input, "Event or panel CSV");
    g->add_option("--format", format, "events|panel")->check(CLI::IsMember({"events", "panel"}))->capture_default_str();
    g->add_option("--tau", config.tau, "Period length in days")->capture_default_str()->check(CLI::Range(2, 100000));
    g->add_option("--alpha", config.alpha, "Accept periods with p > alpha")->capture_default_str();
    g->add_option("--resamples", config.resamples, "Randomization draws per test")->capture_default_str();
    g->add_option("--seed", config.seed, "Base random seed")->capture_default_str();
    g->add_option("--min-peak", config.min_peak, "Minimum single-day focal visits")->capture_default_str();
    g->add_option("--pi-estimator", pi, "nettleton|storey")
        ->check(CLI::IsMember({"nettleton", "storey"}))
        ->capture_default_str();
    g->add_option("--bins", config.bins, "Histogram bins for the adaptive estimator")->capture_default_str();
    g->add_option("--lambda", config.lambda, "Fixed lambda for the Storey estimator")->capture_default_str();
    g->add_option("--z", config.z, "Normal quantile of the interval")->capture_default_str();
    g->add_option("--maxsum", maxsum, "topk|mean")->check(CLI::IsMember({"topk", "mean"}))->capture_default_str();
    g->add_option("--weighting", weighting, "unweighted|traffic")
        ->check(CLI::IsMember({"unweighted", "traffic"}))
        ->capture_default_str();
    g->add_option("--out", out, "Output directory");
    g->add_option("--threads", config.threads, "Worker threads (0 = all)")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic panel with known ground truth");
    GeneratorParams gp;
    simulate->add_option("--pairs", gp.n_pairs)->capture_default_str();
    simulate->add_option("--days", gp.n_days)->capture_default_str();
    simulate->add_option("--rho", gp.rho)->capture_default_str();
    simulate->add_option("--eta", gp.eta)->capture_default_str();
    simulate->add_option("--gamma1", gp.gamma1)->capture_default_str();
    simulate->add_option("--gamma2", gp.gamma2)->capture_default_str();
    simulate->add_option("--gamma3", gp.gamma3)->capture_default_str();
    simulate->add_option("--u-y-mean", gp.u_y_mean)->capture_default_str();
    simulate->add_option("--u-y-sd", gp.u_y_sd)->capture_default_str();
    simulate->add_option("--u-y-ar", gp.u_y_ar)->capture_default_str();
    bool lognormal = false;
    simulate->add_flag("--lognormal", lognormal, "Log-normal demand shock");
    simulate->add_option("--base-x", gp.base_x)->capture_default_str();
    simulate->add_option("--base-yd", gp.base_yd)->capture_default_str();
    simulate->add_option("--noise-x", gp.noise_sd_x)->capture_default_str();
    simulate->add_option("--noise-yr", gp.noise_sd_yr)->capture_default_str();
    simulate->add_option("--noise-yd", gp.noise_sd_yd)->capture_default_str();
    simulate->add_option("--confounded", gp.confounded_fraction, "Share of confounded pairs")->capture_default_str();
    simulate->add_option("--group", gp.group, "Group label for every product");

    auto* discover_cmd = app.add_subcommand("discover", "Screen periods and write p-values and instances");
    auto* estimate_cmd = app.add_subcommand("estimate", "Full pipeline at one alpha");
    auto* sweep_cmd = app.add_subcommand("sweep", "Full pipeline plus an alpha sweep over one screen");
    std::vector<double> alphas{0.80, 0.85, 0.90, 0.95};
    sweep_cmd->add_option("--alphas", alphas, "Significance levels")->delimiter(',')->capture_default_str();

    auto* sens_cmd = app.add_subcommand("sensitivity", "Full pipeline plus the hidden-confound surface");
    sens_cmd->add_option("--c-grid", config.c_grid, "Grid of c1 and c2 values")->delimiter(',');
    sens_cmd->add_option("--kappa", config.kappas, "Shares of perturbed instances")->delimiter(',');
    bool raw = false;
    sens_cmd->add_flag("--raw", raw, "Perturb raw counts instead of standardized copies");

    auto* report_cmd = app.add_subcommand("report", "Recompute estimates from a previous run directory");
    std::string run_dir;
    report_cmd->add_option("--run", run_dir, "Directory with pvalues.csv and instances.csv")->required();

    for (auto* sub : {simulate, discover_cmd, estimate_cmd, sweep_cmd, sens_cmd, report_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        config.input = input;
        config.out_dir = out;
        config.format = *parse_input_format(format);
        config.pi_estimator = pi == "storey" ? PiEstimator::Storey : PiEstimator::Nettleton;
        config.maxsum = maxsum == "mean" ? MaxsumMethod::MeanApprox : MaxsumMethod::TopKExact;
        config.weighting = weighting == "traffic" ? Weighting::Traffic : Weighting::Unweighted;
        config.standardize = !raw;

        if (*simulate) {
            if (out.empty()) throw ArgumentError("simulate needs --out");
            gp.seed = config.seed;
            gp.u_y_shape = lognormal ? LatentShape::LogNormal : LatentShape::Gaussian;
            const auto sp = generate_panel(gp, config.threads);
            fs::create_directories(config.out_dir);
            {
                auto o = open_out(config.out_dir / "panel.csv");
                write_panel_csv(o, sp.panel);
            }
            auto o = open_out(config.out_dir / "ground_truth.csv");
            write_truth_csv(o, sp.truth);
            if (sp.n_floored > 0) {
                std::fprintf(stderr, "warning: %zu values floored at 0 (%.4f%%)\n", sp.n_floored,
                             100.0 * sp.floor_rate);
            }
            std::printf("wrote %zu pairs x %zu days to %s\n", gp.n_pairs, gp.n_days, out.c_str());
            return kOk;
        }
        if (*report_cmd) {
            run_report(run_dir, config);
            return kOk;
        }
        if (input.empty()) throw ArgumentError("--input is required");
        if (*discover_cmd) {
            if (out.empty()) throw ArgumentError("discover needs --out");
            run_discover(config);
            return kOk;
        }
        if (*sweep_cmd) {
            if (alphas.size() < 2) throw ArgumentError("--alphas needs at least two levels");
            config.sweep_alphas = alphas;
        }
        if (*sens_cmd) config.sensitivity = true;
        const auto r = run_pipeline(config);
        for (const auto& rej : r.rejected) {
            std::fprintf(stderr, "rejected line %zu: %s\n", rej.line, rej.message.c_str());
        }
        print_summary(r.estimates);
        for (const auto& s : r.sweep) {
            std::printf("alpha=%.3f  W=%zu  phi=%.4f  rho=%.6f\n", s.alpha, s.W, s.phi, s.rho_hat);
        }
        return kOk;
    } catch (const ArgumentError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsage;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    }
}
