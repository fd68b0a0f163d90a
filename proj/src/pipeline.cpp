#include "splitdoor/pipeline.hpp"

#include "splitdoor/csv.hpp"
#include "splitdoor/error.hpp"
#include "splitdoor/seeding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace splitdoor {

using nlohmann::json;

std::optional<InputFormat> parse_input_format(std::string_view s)
{
    if (s == "events") return InputFormat::Events;
    if (s == "panel") return InputFormat::Panel;
    return std::nullopt;
}

std::string_view to_string(InputFormat f)
{
    return f == InputFormat::Events ? "events" : "panel";
}

void RunConfig::validate() const
{
    if (tau < 2) throw ArgumentError("tau must be at least 2");
    check_alpha(alpha);
    for (double a : sweep_alphas) check_alpha(a);
    if (resamples == 0) throw ArgumentError("resamples must be positive");
    if (!(min_peak >= 0.0)) throw ArgumentError("min-peak must be nonnegative");
    if (bins < 2) throw ArgumentError("bins must be at least 2");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw ArgumentError("lambda must lie in [0, 1)");
    if (!(z >= 0.0)) throw ArgumentError("z must be nonnegative");
    for (double k : kappas) {
        if (!(k >= 0.0 && k <= 1.0)) throw ArgumentError("kappa must lie in [0, 1]");
    }
    for (double c : c_grid) {
        if (!(c >= -1.0 && c <= 1.0)) throw ArgumentError("sensitivity grid values must lie in [-1, 1]");
    }
}

json to_json(const RunConfig& c)
{
    return json{{"input", c.input.string()},
                {"format", to_string(c.format)},
                {"tau", c.tau},
                {"alpha", c.alpha},
                {"sweep_alphas", c.sweep_alphas},
                {"resamples", c.resamples},
                {"seed", c.seed},
                {"min_peak", c.min_peak},
                {"pi_estimator", to_string(c.pi_estimator)},
                {"bins", c.bins},
                {"lambda", c.lambda},
                {"z", c.z},
                {"maxsum", to_string(c.maxsum)},
                {"weighting", c.weighting == Weighting::Traffic ? "traffic" : "unweighted"},
                {"sensitivity", c.sensitivity},
                {"c_grid", c.c_grid},
                {"kappas", c.kappas},
                {"standardize", c.standardize}};
}

namespace {

std::size_t count_unique_focals(std::span<const SplitDoorInstance> instances)
{
    std::set<std::string> f;
    for (const auto& in : instances) f.insert(in.period.focal_id);
    return f.size();
}

struct CoreEstimate {
    std::vector<FocalEstimate> focals;
    EffectEstimate effect;
    MultiplicityReport multiplicity;
    double phi_prime_used = 0.0;
    EffectInterval interval;
};

CoreEstimate core_estimate(std::span<const double> p_values, std::span<const SplitDoorInstance> instances,
                           double alpha, const RunConfig& config)
{
    if (instances.empty()) throw DataError("no discovered instances");
    CoreEstimate c;
    c.focals = aggregate_focal(instances);
    c.effect = mean_effect(c.focals, config.weighting);
    c.multiplicity = assess_multiplicity(p_values, alpha, instances.size(), c.effect.N, config.pi_estimator,
                                         config.bins, config.lambda);
    c.phi_prime_used = std::clamp(c.multiplicity.phi_prime, 0.0, 1.0);
    c.interval = effect_interval(focal_rhos(c.focals), c.phi_prime_used, config.z, config.maxsum);
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string period_status(const PairPeriod& p)
{
    if (p.sum_x() <= 0.0) return "zero_x";
    if (is_constant(p.x)) return "degenerate_x";
    if (is_constant(p.y_d)) return "constant_direct";
    return "tested";
}

// Rethrows the active exception with the stage name prefixed, keeping its category.
[[noreturn]] void rethrow_in_stage(const std::string& stage)
{
    try {
        throw;
    } catch (const DataError& e) {
        throw DataError(stage + ": " + e.what());
    } catch (const ArgumentError& e) {
        throw ArgumentError(stage + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(stage + ": " + e.what());
    }
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

Estimates estimate_all(std::span<const PairPeriod> periods, std::span<const double> p_values,
                       std::span<const SplitDoorInstance> instances, double alpha,
                       const std::map<std::string, std::string>& focal_groups, const RunConfig& config)
{
    Estimates e;
    e.alpha = alpha;
    e.m = p_values.size();
    e.W = instances.size();
    auto core = core_estimate(p_values, instances, alpha, config);
    e.focals = std::move(core.focals);
    e.effect = core.effect;
    e.multiplicity = core.multiplicity;
    e.phi_prime_used = core.phi_prime_used;
    e.interval = core.interval;
    e.unique_focals = count_unique_focals(instances);
    e.naive = naive_ctr(periods);
    e.naive_mean_of_ratios = naive_ctr_mean_of_ratios(periods);
    e.groups = group_breakdown(instances, periods, focal_groups);
    return e;
}

std::vector<SweepRow> alpha_sweep(const Screen& screen, std::span<const double> alphas, const RunConfig& config)
{
    const auto p = screen.p_values();
    std::vector<SweepRow> rows;
    for (double a : alphas) {
        const auto run = threshold(screen, a);
        SweepRow row;
        row.alpha = a;
        row.W = run.W;
        row.unique_focals = count_unique_focals(run.instances);
        if (run.W == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.phi = row.phi_prime = row.rho_hat = row.sigma_hat = row.lower = row.upper = nan;
        } else {
            const auto c = core_estimate(p, run.instances, a, config);
            row.N = c.effect.N;
            row.phi = c.multiplicity.phi;
            row.phi_prime = c.multiplicity.phi_prime;
            row.rho_hat = c.effect.rho_hat;
            row.sigma_hat = c.effect.sigma_hat;
            row.lower = c.interval.lower;
            row.upper = c.interval.upper;
        }
        rows.push_back(row);
    }
    return rows;
}

PanelLoad load_input(const RunConfig& config)
{
    std::ifstream in(config.input, std::ios::binary);
    if (!in) throw DataError("cannot open input '" + config.input.string() + "'");
    if (config.format == InputFormat::Panel) return read_panel_csv(in);
    auto ev = read_event_csv(in);
    PanelLoad load;
    load.rejected = std::move(ev.rejected);
    load.panel = ingest_events(ev.events);
    return load;
}

PipelineResult run_pipeline(const RunConfig& config, const DailyPanel& panel)
{
    config.validate();
    PipelineResult r;
    r.focal_groups = panel.groups;
    r.counts.pairs_loaded = panel.pairs.size();
    std::string stage = "prepare";
    try {
        auto t0 = std::chrono::steady_clock::now();
        panel.validate();
        const auto popular = apply_popularity_filter(panel, config.min_peak);
        r.counts.pairs_after_popularity = popular.pairs.size();
        auto sliced = slice_periods(popular, config.tau);
        r.counts.periods_sliced = sliced.size();
        auto filtered = filter_constant_direct(std::move(sliced));
        r.counts.periods_constant_direct = filtered.removed;
        r.periods = std::move(filtered.periods);
        if (r.periods.empty()) throw DataError("no testable periods");
        r.timing["prepare"] = seconds_since(t0);

        stage = "discover";
        t0 = std::chrono::steady_clock::now();
        r.screen = screen_periods(r.periods, config.resamples, config.seed, config.threads);
        r.counts.periods_degenerate_x = r.screen.excluded_degenerate_x;
        r.counts.periods_zero_x = r.screen.excluded_zero_x;
        r.run = threshold(r.screen, config.alpha);
        r.timing["discover"] = seconds_since(t0);

        stage = "estimate";
        t0 = std::chrono::steady_clock::now();
        r.estimates = estimate_all(r.periods, r.run.all_p_values, r.run.instances, config.alpha, r.focal_groups, config);
        r.timing["estimate"] = seconds_since(t0);

        if (!config.sweep_alphas.empty()) {
            stage = "sweep";
            t0 = std::chrono::steady_clock::now();
            r.sweep = alpha_sweep(r.screen, config.sweep_alphas, config);
            r.timing["sweep"] = seconds_since(t0);
        }
        if (config.sensitivity) {
            stage = "sensitivity";
            t0 = std::chrono::steady_clock::now();
            for (std::size_t k = 0; k < config.kappas.size(); ++k) {
                SensitivityConfig sc;
                sc.c1_grid = config.c_grid;
                sc.c2_grid = config.c_grid;
                sc.kappa = config.kappas[k];
                sc.seed = combine_seed(config.seed ^ 0x5e75e75e75e75e75ULL, k);
                sc.standardize = config.standardize;
                auto s = sensitivity_surface(r.run.instances, sc, ratio_estimator, config.threads);
                r.surface.insert(r.surface.end(), s.cells.begin(), s.cells.end());
            }
            r.timing["sensitivity"] = seconds_since(t0);
        }
    } catch (...) {
        rethrow_in_stage(stage);
    }
    return r;
}

json estimates_json(const Estimates& e)
{
    const auto& mr = e.multiplicity;
    json groups = json::array();
    for (const auto& g : e.groups) {
        groups.push_back({{"group", g.group},
                          {"n_instances", g.n_instances},
                          {"n_focals", g.n_focals},
                          {"N", g.effect.N},
                          {"causal_ctr", g.effect.rho_hat},
                          {"sigma_hat", g.effect.sigma_hat},
                          {"naive_ctr", g.naive_ctr}});
    }
    return json{{"alpha", e.alpha},
                {"m", e.m},
                {"W", e.W},
                {"N", e.effect.N},
                {"unique_focals", e.unique_focals},
                {"rho_hat", e.effect.rho_hat},
                {"sigma_hat", e.effect.sigma_hat},
                {"naive_ctr", e.naive},
                {"naive_ctr_mean_of_ratios", e.naive_mean_of_ratios},
                {"interval",
                 {{"lower", e.interval.lower},
                  {"upper", e.interval.upper},
                  {"rho_maxsum", e.interval.rho_maxsum},
                  {"z", e.interval.z},
                  {"method", to_string(e.interval.method)},
                  {"phi_prime_used", e.phi_prime_used}}},
                {"multiplicity",
                 {{"pi_indep_storey", mr.pi_indep_storey},
                  {"pi_indep_nettleton", mr.pi_indep_nettleton},
                  {"lambda_storey", mr.lambda_storey},
                  {"lambda_nettleton", mr.lambda_nettleton},
                  {"bins", mr.bins},
                  {"pi_estimator", to_string(mr.chosen)},
                  {"pi_dep", mr.pi_dep},
                  {"phi", mr.phi},
                  {"phi_prime", mr.phi_prime}}},
                {"groups", groups}};
}

json report_json(const PipelineResult& r, const RunConfig& config)
{
    json rep;
    rep["status"] = "complete";
    rep["config"] = to_json(config);
    rep["counts"] = {{"rejected_rows", r.rejected.size()},
                     {"pairs_loaded", r.counts.pairs_loaded},
                     {"pairs_after_popularity", r.counts.pairs_after_popularity},
                     {"periods_sliced", r.counts.periods_sliced},
                     {"periods_constant_direct", r.counts.periods_constant_direct},
                     {"periods_degenerate_x", r.counts.periods_degenerate_x},
                     {"periods_zero_x", r.counts.periods_zero_x}};
    rep["estimate"] = estimates_json(r.estimates);
    if (!r.sweep.empty()) {
        json rows = json::array();
        for (const auto& s : r.sweep) {
            rows.push_back({{"alpha", s.alpha},
                            {"W", s.W},
                            {"unique_focals", s.unique_focals},
                            {"N", s.N},
                            {"phi", number_or_null(s.phi)},
                            {"phi_prime", number_or_null(s.phi_prime)},
                            {"rho_hat", number_or_null(s.rho_hat)},
                            {"sigma_hat", number_or_null(s.sigma_hat)},
                            {"lower", number_or_null(s.lower)},
                            {"upper", number_or_null(s.upper)}});
        }
        rep["alpha_sweep"] = rows;
    }
    json timing = json::object();
    for (const auto& [k, v] : r.timing) timing[k] = v;
    rep["timing"] = timing;
    return rep;
}

void write_instances_csv(std::ostream& out, std::span<const SplitDoorInstance> instances)
{
    out << "focal_id,target_id,period_index,p_value,statistic,rho_ij_tau\n";
    for (const auto& in : instances) {
        csv::write_row(out, {in.period.focal_id, in.period.target_id, std::to_string(in.period.period_index),
                             csv::format_double(in.test.p_value), csv::format_double(in.test.statistic),
                             csv::format_double(in.rho_ij_tau)});
    }
}

void write_pvalues_csv(std::ostream& out, const PipelineResult& result)
{
    out << "focal_id,target_id,period_index,group,status,sum_x,sum_y_r,statistic,p_value\n";
    std::size_t k = 0;  // walks screen.tested, which is the tested subset in the same order
    const auto& tested = result.screen.tested;
    for (const auto& p : result.periods) {
        const auto status = period_status(p);
        std::string stat, pv;
        if (status == "tested" && k < tested.size() && tested[k].focal_id == p.focal_id &&
            tested[k].target_id == p.target_id && tested[k].period_index == p.period_index) {
            stat = csv::format_double(result.screen.results[k].statistic);
            pv = csv::format_double(result.screen.results[k].p_value);
            ++k;
        }
        auto g = result.focal_groups.find(p.focal_id);
        csv::write_row(out, {p.focal_id, p.target_id, std::to_string(p.period_index),
                             g == result.focal_groups.end() ? std::string() : g->second, status,
                             csv::format_double(p.sum_x()), csv::format_double(p.sum_y_r()), stat, pv});
    }
}

void write_groups_csv(std::ostream& out, std::span<const GroupEstimate> groups)
{
    out << "group,n_instances,n_focals,causal_ctr,naive_ctr\n";
    for (const auto& g : groups) {
        csv::write_row(out, {g.group, std::to_string(g.n_instances), std::to_string(g.n_focals),
                             csv::format_double(g.effect.rho_hat), csv::format_double(g.naive_ctr)});
    }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "alpha,W,unique_focals,N,phi,phi_prime,rho_hat,sigma_hat,lower,upper\n";
    for (const auto& s : rows) {
        csv::write_row(out, {csv::format_double(s.alpha), std::to_string(s.W), std::to_string(s.unique_focals),
                             std::to_string(s.N), csv::format_double(s.phi), csv::format_double(s.phi_prime),
                             csv::format_double(s.rho_hat), csv::format_double(s.sigma_hat),
                             csv::format_double(s.lower), csv::format_double(s.upper)});
    }
}

void write_histogram_csv(std::ostream& out, std::span<const double> p_values, std::size_t bins)
{
    out << "bin_lo,bin_hi,count\n";
    const auto counts = pvalue_histogram(p_values, bins);
    for (std::size_t b = 0; b < bins; ++b) {
        csv::write_row(out, {csv::format_double(static_cast<double>(b) / static_cast<double>(bins)),
                             csv::format_double(static_cast<double>(b + 1) / static_cast<double>(bins)),
                             std::to_string(counts[b])});
    }
}

namespace {

void write_file(const std::filesystem::path& path, const auto& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace

void write_outputs(const std::filesystem::path& dir, const PipelineResult& r, const RunConfig& config)
{
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", [&](std::ostream& o) { o << report_json(r, config).dump(2) << '\n'; });
    write_file(dir / "instances.csv", [&](std::ostream& o) { write_instances_csv(o, r.run.instances); });
    write_file(dir / "pvalues.csv", [&](std::ostream& o) { write_pvalues_csv(o, r); });
    write_file(dir / "groups.csv", [&](std::ostream& o) { write_groups_csv(o, r.estimates.groups); });
    write_file(dir / "pvalue_histogram.csv",
               [&](std::ostream& o) { write_histogram_csv(o, r.run.all_p_values, config.bins); });
    if (!r.sweep.empty()) write_file(dir / "alpha_sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, r.sweep); });
    if (!r.surface.empty()) {
        write_file(dir / "sensitivity_surface.csv", [&](std::ostream& o) { write_surface_csv(o, r.surface); });
    }
}

PipelineResult run_pipeline(const RunConfig& config)
{
    auto fail = [&](const std::string& stage, const std::string& what) {
        if (config.out_dir.empty()) return;
        std::error_code ec;
        std::filesystem::create_directories(config.out_dir, ec);
        std::ofstream out(config.out_dir / "report.json");
        out << json{{"status", "incomplete"}, {"failed_stage", stage}, {"error", what}, {"config", to_json(config)}}
                   .dump(2)
            << '\n';
    };

    try {
        config.validate();
    } catch (const std::exception& e) {
        fail("config", e.what());
        rethrow_in_stage("config");
    }
    PanelLoad load;
    try {
        load = load_input(config);
    } catch (const std::exception& e) {
        fail("load", e.what());
        rethrow_in_stage("load");
    }
    PipelineResult r;
    try {
        r = run_pipeline(config, load.panel);
    } catch (const std::exception& e) {
        const std::string what = e.what();
        fail(what.substr(0, what.find(':')), what);
        throw;
    }
    r.rejected = std::move(load.rejected);
    r.counts.rejected_rows = r.rejected.size();
    if (!config.out_dir.empty()) {
        try {
            write_outputs(config.out_dir, r, config);
        } catch (...) {
            rethrow_in_stage("write");
        }
    }
    return r;
}

Estimates recompute_estimates(std::istream& pvalues_csv, std::istream& instances_csv, const RunConfig& config)
{
    csv::Reader pv(pvalues_csv);
    auto head = pv.next();
    if (!head || head->fields.size() != 9) throw DataError("pvalues.csv: unexpected header");

    std::vector<PairPeriod> periods;
    std::vector<double> p_values;
    std::map<std::string, std::string> groups;
    std::map<std::tuple<std::string, std::string, std::size_t>, double> x_total;
    while (auto rec = pv.next()) {
        const auto& f = rec->fields;
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 9) throw DataError("pvalues.csv line " + std::to_string(rec->line) + ": expected 9 fields");
        const auto k = csv::parse_int(f[2]);
        const auto sx = csv::parse_double(f[5]);
        const auto sy = csv::parse_double(f[6]);
        if (!k || !sx || !sy) throw DataError("pvalues.csv line " + std::to_string(rec->line) + ": bad number");
        PairPeriod p;
        p.focal_id = f[0];
        p.target_id = f[1];
        p.period_index = static_cast<std::size_t>(*k);
        p.x = {*sx};
        p.y_r = {*sy};
        if (!f[3].empty()) groups[f[0]] = f[3];
        if (f[4] == "tested") {
            const auto pval = csv::parse_double(f[8]);
            if (!pval) throw DataError("pvalues.csv line " + std::to_string(rec->line) + ": missing p-value");
            p_values.push_back(*pval);
        }
        x_total[{p.focal_id, p.target_id, p.period_index}] = *sx;
        periods.push_back(std::move(p));
    }

    csv::Reader ir(instances_csv);
    head = ir.next();
    if (!head || head->fields.size() != 6) throw DataError("instances.csv: unexpected header");
    std::vector<SplitDoorInstance> instances;
    while (auto rec = ir.next()) {
        const auto& f = rec->fields;
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 6) throw DataError("instances.csv line " + std::to_string(rec->line) + ": expected 6 fields");
        SplitDoorInstance in;
        in.period.focal_id = f[0];
        in.period.target_id = f[1];
        const auto k = csv::parse_int(f[2]);
        const auto pval = csv::parse_double(f[3]);
        const auto stat = csv::parse_double(f[4]);
        const auto rho = csv::parse_double(f[5]);
        if (!k || !pval || !stat || !rho) {
            throw DataError("instances.csv line " + std::to_string(rec->line) + ": bad number");
        }
        in.period.period_index = static_cast<std::size_t>(*k);
        auto xt = x_total.find({f[0], f[1], in.period.period_index});
        if (xt != x_total.end()) in.period.x = {xt->second};
        in.test.p_value = *pval;
        in.test.statistic = *stat;
        in.rho_ij_tau = *rho;
        instances.push_back(std::move(in));
    }
    return estimate_all(periods, p_values, instances, config.alpha, groups, config);
}

}  // namespace splitdoor
