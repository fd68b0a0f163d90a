#include "splitdoor/core_data.hpp"
#include "splitdoor/csv.hpp"
#include "splitdoor/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace splitdoor;

namespace {

Date d(int y, unsigned m, unsigned day)
{
    return Date{std::chrono::year{y} / m / day};
}

}  // namespace

TEST_CASE("dates parse strictly")
{
    CHECK(parse_date("2021-02-28") == d(2021, 2, 28));
    CHECK_FALSE(parse_date("2021-02-29").has_value());
    CHECK_FALSE(parse_date("2021-2-28").has_value());
    CHECK_FALSE(parse_date("2021-02-2x").has_value());
    CHECK(format_date(d(2020, 1, 5)) == "2020-01-05");
}

TEST_CASE("csv reader handles quotes, embedded newlines and CRLF")
{
    std::istringstream in("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",z\n");
    csv::Reader r(in);
    auto h = r.next();
    REQUIRE(h);
    CHECK(h->fields == std::vector<std::string>{"a", "b"});
    auto r1 = r.next();
    REQUIRE(r1);
    CHECK(r1->fields == std::vector<std::string>{"x,1", "say \"hi\""});
    CHECK(r1->line == 2);
    auto r2 = r.next();
    REQUIRE(r2);
    CHECK(r2->fields[0] == "multi\nline");
    CHECK(r2->line == 3);
    CHECK_FALSE(r.next().has_value());

    std::istringstream bad("a\n\"open");
    csv::Reader rb(bad);
    rb.next();
    CHECK_THROWS_AS(rb.next(), DataError);
}

TEST_CASE("numbers round-trip through csv formatting")
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, 0.0}) {
        CHECK(*csv::parse_double(csv::format_double(v)) == v);
    }
    CHECK_FALSE(csv::parse_double("1.5x").has_value());
    CHECK_FALSE(csv::parse_int("7.0").has_value());
    CHECK(csv::quote("a\"b") == "\"a\"\"b\"");
}

TEST_CASE("event ingestion builds treatment, referred and direct series")
{
    std::istringstream in("date,focal_id,target_id,channel,group,count\n"
                          "2020-01-01,,A,direct,books,10\n"
                          "2020-01-01,A,B,referred,books,2\n"
                          "2020-01-02,,B,direct,toys,5\n"
                          "2020-01-03,C,A,referred,,1\n"
                          "2020-01-03,,B,direct,,3\n"
                          "bad-date,,A,direct,,1\n"
                          "2020-01-02,,A,sideways,,1\n");
    auto load = read_event_csv(in);
    REQUIRE(load.rejected.size() == 2);
    CHECK(load.rejected[0].line == 7);
    CHECK(load.rejected[1].line == 8);

    const auto panel = ingest_events(load.events);
    CHECK(panel.start == d(2020, 1, 1));
    CHECK(panel.n_days == 3);
    REQUIRE(panel.pairs.size() == 2);
    const auto& ab = panel.pairs[0];
    CHECK(ab.focal_id == "A");
    CHECK(ab.target_id == "B");
    // Every visit to A counts toward its treatment series, whatever the route.
    CHECK(ab.x == std::vector<double>{10, 0, 1});
    CHECK(ab.y_r == std::vector<double>{2, 0, 0});
    CHECK(ab.y_d == std::vector<double>{0, 5, 3});
    const auto& ca = panel.pairs[1];
    CHECK(ca.x == std::vector<double>{0, 0, 0});
    CHECK(ca.y_d == std::vector<double>{10, 0, 0});
    CHECK(panel.group_of("B") == "books");  // smallest of {books, toys}
    CHECK(panel.group_of("Z") == "unknown");
}

TEST_CASE("event ingestion does not depend on event order")
{
    std::vector<VisitEvent> ev;
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> day(0, 20), prod(0, 5), ch(0, 1);
    for (int i = 0; i < 500; ++i) {
        VisitEvent e;
        e.date = d(2020, 3, 1) + std::chrono::days(day(rng));
        e.focal_id = "p" + std::to_string(prod(rng));
        e.target_id = "p" + std::to_string(prod(rng));
        e.channel = ch(rng) ? Channel::Referred : Channel::Direct;
        e.group = "g" + std::to_string(prod(rng) % 2);
        ev.push_back(e);
    }
    const auto a = ingest_events(ev);
    std::shuffle(ev.begin(), ev.end(), rng);
    CHECK(ingest_events(ev) == a);
    CHECK_THROWS_AS(ingest_events({}), DataError);
}

TEST_CASE("panel csv round-trips and zero-fills missing days")
{
    std::istringstream in("date,focal_id,target_id,x,y_r,y_d,group\n"
                          "2020-01-01,f,t,10.5,1,3,g\n"
                          "2020-01-03,f,t,12,2,4,g\n"
                          "2020-01-03,f,t,12,2,4,g\n"
                          "2020-01-02,f,u,-1,0,0,g\n");
    auto load = read_panel_csv(in);
    CHECK(load.rejected.size() == 2);
    REQUIRE(load.panel.pairs.size() == 1);
    CHECK(load.panel.pairs[0].x == std::vector<double>{10.5, 0, 12});
    CHECK(load.panel.group_of("f") == "g");

    std::ostringstream out;
    write_panel_csv(out, load.panel);
    std::istringstream back(out.str());
    CHECK(read_panel_csv(back).panel == load.panel);

    std::istringstream empty("date,focal_id,target_id,x,y_r,y_d\n");
    CHECK_THROWS_AS(read_panel_csv(empty), DataError);
    std::istringstream nohead("date,focal_id,x\n");
    CHECK_THROWS_AS(read_panel_csv(nohead), DataError);
}

TEST_CASE("popularity filter keeps pairs with a peak at or above the threshold")
{
    DailyPanel p;
    p.start = d(2020, 1, 1);
    p.n_days = 3;
    p.pairs = {{"a", "b", {1, 10, 2}, {0, 0, 0}, {1, 2, 3}}, {"c", "d", {9, 9, 9.9}, {0, 0, 0}, {1, 2, 3}}};
    CHECK(apply_popularity_filter(p, 10).pairs.size() == 1);
    CHECK(apply_popularity_filter(p, 0).pairs.size() == 2);
    CHECK_THROWS_AS(apply_popularity_filter(p, -1), ArgumentError);
}

TEST_CASE("slicing tiles from the first day and drops the partial tail")
{
    DailyPanel p;
    p.start = d(2020, 1, 1);
    p.n_days = 40;
    std::vector<double> x(40);
    for (std::size_t i = 0; i < 40; ++i) x[i] = static_cast<double>(i);
    p.pairs = {{"b", "t", x, x, x}, {"a", "t", x, x, x}};
    const auto periods = slice_periods(p, 15);
    REQUIRE(periods.size() == 4);
    CHECK(periods[0].focal_id == "a");
    CHECK(periods[1].period_index == 1);
    CHECK(periods[1].x.front() == 15.0);
    CHECK(periods[1].start_date == d(2020, 1, 16));
    CHECK(periods[1].sum_x() == doctest::Approx(15 * 22.0));
    CHECK(slice_periods(p, 41).empty());
    CHECK_THROWS_AS(slice_periods(p, 1), ArgumentError);
}

TEST_CASE("constant direct windows are removed and counted")
{
    std::vector<PairPeriod> ps(3);
    ps[0].y_d = {1, 2, 3};
    ps[1].y_d = {4, 4, 4};
    ps[2].y_d = {0, 1, 0};
    ps[2].focal_id = "z";
    const auto r = filter_constant_direct(ps);
    CHECK(r.removed == 1);
    REQUIRE(r.periods.size() == 2);
    CHECK(r.periods[1].focal_id == "z");
}

TEST_CASE("merging rejects overlapping pairs and mismatched calendars")
{
    DailyPanel a, b;
    a.start = b.start = d(2020, 1, 1);
    a.n_days = b.n_days = 2;
    a.pairs = {{"x", "y", {1, 2}, {0, 0}, {1, 1}}};
    b.pairs = {{"a", "y", {1, 2}, {0, 0}, {1, 1}}};
    const auto m = merge_panels(a, b);
    CHECK(m.pairs.front().focal_id == "a");
    CHECK_THROWS_AS(merge_panels(a, a), ArgumentError);
    b.n_days = 3;
    CHECK_THROWS_AS(merge_panels(a, b), ArgumentError);
}
