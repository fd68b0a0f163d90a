#pragma once

// Domain types for daily traffic panels and the preparation steps applied
// before any independence testing: event aggregation, popularity filtering,
// fixed-length period slicing and removal of constant direct-traffic windows.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace splitdoor {

using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Returns nullopt for anything else, including
/// impossible calendar dates.
std::optional<Date> parse_date(std::string_view s);
std::string format_date(Date d);

enum class Channel { Referred, Direct };

std::optional<Channel> parse_channel(std::string_view s);
std::string_view to_string(Channel c);

/// One logged page visit (or a batch of `count` identical visits).
/// A Referred event is a click-through from `focal_id` to `target_id`;
/// a Direct event reaches `target_id` by any other route and ignores `focal_id`.
struct VisitEvent {
    Date date{};
    std::string focal_id;
    std::string target_id;
    Channel channel = Channel::Direct;
    std::string group;  // optional label of target_id; empty when absent
    std::uint64_t count = 1;
};

/// Aligned daily series for one (focal, target) product pair.
struct PairSeries {
    std::string focal_id;
    std::string target_id;
    std::vector<double> x;    // visits to the focal product
    std::vector<double> y_r;  // referred click-throughs focal -> target
    std::vector<double> y_d;  // direct visits to the target
};

/// Daily series for every product pair on one gap-free calendar.
/// Pairs are kept sorted by (focal_id, target_id).
struct DailyPanel {
    Date start{};
    std::size_t n_days = 0;
    std::vector<PairSeries> pairs;
    std::map<std::string, std::string> groups;  // product id -> group label

    Date day(std::size_t i) const { return start + std::chrono::days(static_cast<int>(i)); }

    /// Throws DataError if any series has the wrong length or a negative value.
    void validate() const;

    /// Group of a product, or "unknown" when it has none.
    std::string group_of(const std::string& product_id) const;

    friend bool operator==(const DailyPanel&, const DailyPanel&) = default;
};

bool operator==(const PairSeries& a, const PairSeries& b);

/// A rejected input row with the line it came from.
struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct EventLoad {
    std::vector<VisitEvent> events;
    std::vector<RowError> rejected;
};

struct PanelLoad {
    DailyPanel panel;
    std::vector<RowError> rejected;
};

/// Reads an event CSV (`date,focal_id,target_id,channel,group,count`).
/// Malformed rows are rejected with their line number; the header is required.
EventLoad read_event_csv(std::istream& in);

/// Aggregates events into daily sums. Output does not depend on event order.
/// Throws DataError("no valid events") on empty input.
DailyPanel ingest_events(std::span<const VisitEvent> events);

/// Reads a pre-aggregated panel CSV (`date,focal_id,target_id,x,y_r,y_d,group`).
/// The group column labels the focal product. Throws DataError when no row is valid.
PanelLoad read_panel_csv(std::istream& in);

/// Writes one row per (day, pair) with round-trip precision.
void write_panel_csv(std::ostream& out, const DailyPanel& panel);

/// Keeps pairs whose focal series reaches `min_peak` on at least one day (inclusive).
DailyPanel apply_popularity_filter(const DailyPanel& panel, double min_peak = 10.0);

/// Union of the pairs of two panels. Both must share a calendar and
/// have disjoint pair keys.
DailyPanel merge_panels(const DailyPanel& a, const DailyPanel& b);

/// One fixed-length window of one product pair: the unit of independence testing.
struct PairPeriod {
    std::string focal_id;
    std::string target_id;
    std::size_t period_index = 0;
    Date start_date{};
    std::size_t tau = 0;
    std::vector<double> x;
    std::vector<double> y_r;
    std::vector<double> y_d;

    double sum_x() const;
    double sum_y_r() const;
};

inline constexpr std::size_t kDefaultTau = 15;

/// Tiles the calendar from its first day into consecutive windows of `tau`
/// days; a trailing partial window is dropped. Output is ordered by
/// (focal_id, target_id, period_index). Throws ArgumentError for tau < 2.
std::vector<PairPeriod> slice_periods(const DailyPanel& panel, std::size_t tau = kDefaultTau);

struct ConstantFilterResult {
    std::vector<PairPeriod> periods;
    std::size_t removed = 0;
};

/// Drops periods whose direct-traffic window is exactly constant.
ConstantFilterResult filter_constant_direct(std::vector<PairPeriod> periods);

bool is_constant(std::span<const double> v);

}  // namespace splitdoor
