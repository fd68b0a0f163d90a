#include "splitdoor/core_data.hpp"

#include "splitdoor/csv.hpp"
#include "splitdoor/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <tuple>
#include <utility>

namespace splitdoor {

namespace chr = std::chrono;

std::optional<Date> parse_date(std::string_view s)
{
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
        if (ec != std::errc{} || ptr != s.data() + pos + len) return std::nullopt;
        return v;
    };
    const auto y = num(0, 4);
    const auto m = num(5, 2);
    const auto d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    const chr::year_month_day ymd{chr::year{*y}, chr::month{static_cast<unsigned>(*m)},
                                  chr::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_date(Date d)
{
    const chr::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::optional<Channel> parse_channel(std::string_view s)
{
    if (s == "referred" || s == "REFERRED") return Channel::Referred;
    if (s == "direct" || s == "DIRECT") return Channel::Direct;
    return std::nullopt;
}

std::string_view to_string(Channel c)
{
    return c == Channel::Referred ? "referred" : "direct";
}

bool operator==(const PairSeries& a, const PairSeries& b)
{
    return std::tie(a.focal_id, a.target_id, a.x, a.y_r, a.y_d) ==
           std::tie(b.focal_id, b.target_id, b.x, b.y_r, b.y_d);
}

void DailyPanel::validate() const
{
    for (const auto& p : pairs) {
        if (p.x.size() != n_days || p.y_r.size() != n_days || p.y_d.size() != n_days) {
            throw DataError("pair (" + p.focal_id + ", " + p.target_id + ") is not aligned to the calendar");
        }
        auto negative = [](const std::vector<double>& v) {
            return std::any_of(v.begin(), v.end(), [](double a) { return !(a >= 0.0); });
        };
        if (negative(p.x) || negative(p.y_r) || negative(p.y_d)) {
            throw DataError("pair (" + p.focal_id + ", " + p.target_id + ") has negative or NaN traffic");
        }
    }
}

std::string DailyPanel::group_of(const std::string& product_id) const
{
    auto it = groups.find(product_id);
    return it == groups.end() ? std::string("unknown") : it->second;
}

namespace {

// Column lookup by header name so that column order is free.
class Header {
public:
    Header(const csv::Record& rec, std::initializer_list<std::string_view> required, std::string_view what)
    {
        for (std::size_t i = 0; i < rec.fields.size(); ++i) {
            std::string name = rec.fields[i];
            if (i == 0 && name.size() >= 3 && name.compare(0, 3, "\xEF\xBB\xBF") == 0) name.erase(0, 3);
            index_.emplace_back(std::move(name), i);
        }
        for (auto r : required) {
            if (!find(r)) throw DataError(std::string(what) + ": header lacks column '" + std::string(r) + "'");
        }
    }

    std::optional<std::size_t> find(std::string_view name) const
    {
        for (const auto& [n, i] : index_) {
            if (n == name) return i;
        }
        return std::nullopt;
    }

    std::size_t width() const { return index_.size(); }

private:
    std::vector<std::pair<std::string, std::size_t>> index_;
};

void keep_smallest_label(std::map<std::string, std::string>& groups, const std::string& id, const std::string& label)
{
    if (label.empty() || id.empty()) return;
    auto [it, inserted] = groups.emplace(id, label);
    if (!inserted && label < it->second) it->second = label;
}

}  // namespace

EventLoad read_event_csv(std::istream& in)
{
    csv::Reader reader(in);
    auto head = reader.next();
    if (!head) throw DataError("event csv: empty input");
    const Header h(*head, {"date", "focal_id", "target_id", "channel"}, "event csv");
    const std::size_t c_date = *h.find("date");
    const std::size_t c_focal = *h.find("focal_id");
    const std::size_t c_target = *h.find("target_id");
    const std::size_t c_channel = *h.find("channel");
    const auto c_group = h.find("group");
    const auto c_count = h.find("count");

    EventLoad load;
    while (auto rec = reader.next()) {
        const auto& f = rec->fields;
        if (f.size() == 1 && f[0].empty()) continue;  // blank line
        auto reject = [&](std::string msg) { load.rejected.push_back({rec->line, std::move(msg)}); };
        if (f.size() != h.width()) {
            reject("expected " + std::to_string(h.width()) + " fields, got " + std::to_string(f.size()));
            continue;
        }
        VisitEvent ev;
        auto date = parse_date(f[c_date]);
        if (!date) {
            reject("unparseable date '" + f[c_date] + "'");
            continue;
        }
        ev.date = *date;
        auto channel = parse_channel(f[c_channel]);
        if (!channel) {
            reject("unknown channel '" + f[c_channel] + "'");
            continue;
        }
        ev.channel = *channel;
        ev.focal_id = f[c_focal];
        ev.target_id = f[c_target];
        if (ev.target_id.empty()) {
            reject("empty target_id");
            continue;
        }
        if (ev.channel == Channel::Referred && ev.focal_id.empty()) {
            reject("referred event without focal_id");
            continue;
        }
        if (c_group) ev.group = f[*c_group];
        if (c_count && !f[*c_count].empty()) {
            auto n = csv::parse_int(f[*c_count]);
            if (!n || *n < 0) {
                reject("count must be a nonnegative integer, got '" + f[*c_count] + "'");
                continue;
            }
            ev.count = static_cast<std::uint64_t>(*n);
        }
        load.events.push_back(std::move(ev));
    }
    return load;
}

DailyPanel ingest_events(std::span<const VisitEvent> events)
{
    if (events.empty()) throw DataError("no valid events");

    Date first = events.front().date;
    Date last = first;
    for (const auto& ev : events) {
        first = std::min(first, ev.date);
        last = std::max(last, ev.date);
    }
    DailyPanel panel;
    panel.start = first;
    panel.n_days = static_cast<std::size_t>((last - first).count()) + 1;

    auto slot = [&](auto& map, const auto& key) -> std::vector<double>& {
        auto [it, _] = map.try_emplace(key, panel.n_days, 0.0);
        return it->second;
    };

    std::map<std::string, std::vector<double>> visits;
    std::map<std::string, std::vector<double>> direct;
    std::map<std::pair<std::string, std::string>, std::vector<double>> referred;

    // Counts are integers, so the sums are exact and order-independent.
    for (const auto& ev : events) {
        const auto day = static_cast<std::size_t>((ev.date - first).count());
        const auto n = static_cast<double>(ev.count);
        slot(visits, ev.target_id)[day] += n;
        if (ev.channel == Channel::Referred) {
            slot(referred, std::make_pair(ev.focal_id, ev.target_id))[day] += n;
        } else {
            slot(direct, ev.target_id)[day] += n;
        }
        keep_smallest_label(panel.groups, ev.target_id, ev.group);
    }

    const std::vector<double> zeros(panel.n_days, 0.0);
    auto lookup = [&](const auto& map, const std::string& key) -> const std::vector<double>& {
        auto it = map.find(key);
        return it == map.end() ? zeros : it->second;
    };

    panel.pairs.reserve(referred.size());
    for (const auto& [key, y_r] : referred) {
        panel.pairs.push_back({key.first, key.second, lookup(visits, key.first), y_r, lookup(direct, key.second)});
    }
    return panel;
}

PanelLoad read_panel_csv(std::istream& in)
{
    csv::Reader reader(in);
    auto head = reader.next();
    if (!head) throw DataError("panel csv: empty input");
    const Header h(*head, {"date", "focal_id", "target_id", "x", "y_r", "y_d"}, "panel csv");
    const std::size_t c_date = *h.find("date");
    const std::size_t c_focal = *h.find("focal_id");
    const std::size_t c_target = *h.find("target_id");
    const std::size_t c_x = *h.find("x");
    const std::size_t c_yr = *h.find("y_r");
    const std::size_t c_yd = *h.find("y_d");
    const auto c_group = h.find("group");

    struct Row {
        Date date;
        double x, y_r, y_d;
    };
    std::map<std::pair<std::string, std::string>, std::map<Date, Row>> rows;
    PanelLoad load;
    std::map<std::string, std::string> groups;

    while (auto rec = reader.next()) {
        const auto& f = rec->fields;
        if (f.size() == 1 && f[0].empty()) continue;
        auto reject = [&](std::string msg) { load.rejected.push_back({rec->line, std::move(msg)}); };
        if (f.size() != h.width()) {
            reject("expected " + std::to_string(h.width()) + " fields, got " + std::to_string(f.size()));
            continue;
        }
        auto date = parse_date(f[c_date]);
        if (!date) {
            reject("unparseable date '" + f[c_date] + "'");
            continue;
        }
        if (f[c_focal].empty() || f[c_target].empty()) {
            reject("empty product id");
            continue;
        }
        auto x = csv::parse_double(f[c_x]);
        auto y_r = csv::parse_double(f[c_yr]);
        auto y_d = csv::parse_double(f[c_yd]);
        if (!x || !y_r || !y_d || !(*x >= 0.0) || !(*y_r >= 0.0) || !(*y_d >= 0.0)) {
            reject("traffic values must be nonnegative numbers");
            continue;
        }
        auto& series = rows[{f[c_focal], f[c_target]}];
        if (!series.emplace(*date, Row{*date, *x, *y_r, *y_d}).second) {
            reject("duplicate row for (" + f[c_focal] + ", " + f[c_target] + ") on " + f[c_date]);
            continue;
        }
        if (c_group) keep_smallest_label(groups, f[c_focal], f[*c_group]);
    }
    if (rows.empty()) throw DataError("panel csv: no valid rows");

    Date first = rows.begin()->second.begin()->first;
    Date last = first;
    for (const auto& [_, series] : rows) {
        first = std::min(first, series.begin()->first);
        last = std::max(last, series.rbegin()->first);
    }
    auto& panel = load.panel;
    panel.start = first;
    panel.n_days = static_cast<std::size_t>((last - first).count()) + 1;
    panel.groups = std::move(groups);
    for (const auto& [key, series] : rows) {
        PairSeries p{key.first, key.second, std::vector<double>(panel.n_days, 0.0),
                     std::vector<double>(panel.n_days, 0.0), std::vector<double>(panel.n_days, 0.0)};
        for (const auto& [date, row] : series) {
            const auto i = static_cast<std::size_t>((date - first).count());
            p.x[i] = row.x;
            p.y_r[i] = row.y_r;
            p.y_d[i] = row.y_d;
        }
        panel.pairs.push_back(std::move(p));
    }
    return load;
}

void write_panel_csv(std::ostream& out, const DailyPanel& panel)
{
    out << "date,focal_id,target_id,x,y_r,y_d,group\n";
    for (const auto& p : panel.pairs) {
        auto g = panel.groups.find(p.focal_id);
        const std::string group = g == panel.groups.end() ? std::string() : g->second;
        for (std::size_t t = 0; t < panel.n_days; ++t) {
            csv::write_row(out, {format_date(panel.day(t)), p.focal_id, p.target_id, csv::format_double(p.x[t]),
                                 csv::format_double(p.y_r[t]), csv::format_double(p.y_d[t]), group});
        }
    }
}

DailyPanel apply_popularity_filter(const DailyPanel& panel, double min_peak)
{
    if (!(min_peak >= 0.0)) throw ArgumentError("min_peak must be nonnegative");
    DailyPanel out;
    out.start = panel.start;
    out.n_days = panel.n_days;
    out.groups = panel.groups;
    for (const auto& p : panel.pairs) {
        if (min_peak == 0.0 || (!p.x.empty() && *std::max_element(p.x.begin(), p.x.end()) >= min_peak)) {
            out.pairs.push_back(p);
        }
    }
    return out;
}

DailyPanel merge_panels(const DailyPanel& a, const DailyPanel& b)
{
    if (a.start != b.start || a.n_days != b.n_days) throw ArgumentError("merge_panels: calendars differ");
    DailyPanel out = a;
    out.pairs.insert(out.pairs.end(), b.pairs.begin(), b.pairs.end());
    std::sort(out.pairs.begin(), out.pairs.end(), [](const PairSeries& l, const PairSeries& r) {
        return std::tie(l.focal_id, l.target_id) < std::tie(r.focal_id, r.target_id);
    });
    auto dup = std::adjacent_find(out.pairs.begin(), out.pairs.end(), [](const PairSeries& l, const PairSeries& r) {
        return l.focal_id == r.focal_id && l.target_id == r.target_id;
    });
    if (dup != out.pairs.end()) {
        throw ArgumentError("merge_panels: duplicate pair (" + dup->focal_id + ", " + dup->target_id + ")");
    }
    for (const auto& [id, g] : b.groups) keep_smallest_label(out.groups, id, g);
    return out;
}

double PairPeriod::sum_x() const
{
    return std::accumulate(x.begin(), x.end(), 0.0);
}

double PairPeriod::sum_y_r() const
{
    return std::accumulate(y_r.begin(), y_r.end(), 0.0);
}

std::vector<PairPeriod> slice_periods(const DailyPanel& panel, std::size_t tau)
{
    if (tau < 2) throw ArgumentError("tau must be at least 2");
    const std::size_t n_periods = panel.n_days / tau;
    std::vector<PairPeriod> out;
    out.reserve(panel.pairs.size() * n_periods);
    for (const auto& p : panel.pairs) {
        for (std::size_t k = 0; k < n_periods; ++k) {
            const auto b = static_cast<std::ptrdiff_t>(k * tau);
            const auto e = b + static_cast<std::ptrdiff_t>(tau);
            out.push_back({p.focal_id, p.target_id, k, panel.day(k * tau), tau,
                           {p.x.begin() + b, p.x.begin() + e},
                           {p.y_r.begin() + b, p.y_r.begin() + e},
                           {p.y_d.begin() + b, p.y_d.begin() + e}});
        }
    }
    std::sort(out.begin(), out.end(), [](const PairPeriod& l, const PairPeriod& r) {
        return std::tie(l.focal_id, l.target_id, l.period_index) < std::tie(r.focal_id, r.target_id, r.period_index);
    });
    return out;
}

bool is_constant(std::span<const double> v)
{
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>{}) == v.end();
}

ConstantFilterResult filter_constant_direct(std::vector<PairPeriod> periods)
{
    ConstantFilterResult r;
    const auto keep = std::stable_partition(periods.begin(), periods.end(),
                                            [](const PairPeriod& p) { return !is_constant(p.y_d); });
    r.removed = static_cast<std::size_t>(std::distance(keep, periods.end()));
    periods.erase(keep, periods.end());
    r.periods = std::move(periods);
    return r;
}

}  // namespace splitdoor
