#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "sgaze/events.hpp"

using namespace sgaze;

namespace {
std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}
}  // namespace

TEST_CASE("event rows map to fields", "[events]") {
    const auto path = write_temp("ev_basic.csv", "100,10,20,1\n");
    const auto ev = load_events(path);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].t == 100);
    CHECK(ev[0].x == 10);
    CHECK(ev[0].y == 20);
    CHECK(ev[0].p == 1);
}

TEST_CASE("empty file gives empty sequence", "[events]") {
    const auto path = write_temp("ev_empty.csv", "");
    CHECK(load_events(path).empty());
}

TEST_CASE("header line is skipped", "[events]") {
    const auto path = write_temp("ev_header.csv", "t_us,x,y,p\n5,1,2,-1\n");
    const auto ev = load_events(path);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].p == -1);
}

TEST_CASE("out-of-order input is sorted", "[events]") {
    const auto path = write_temp("ev_sort.csv", "500,1,1,1\n300,2,2,1\n");
    const auto ev = load_events(path);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].t == 300);
    CHECK(ev[1].t == 500);
}

TEST_CASE("malformed rows and bad coordinates are rejected", "[events]") {
    CHECK_THROWS_AS(load_events(write_temp("ev_bad1.csv", "1,2,3\n")), ParseError);
    CHECK_THROWS_AS(load_events(write_temp("ev_bad2.csv", "1,a,3,1\n")), ParseError);
    CHECK_THROWS_AS(load_events(write_temp("ev_bad3.csv", "1,640,3,1\n")), ParseError);
    CHECK_THROWS_AS(load_events(write_temp("ev_bad4.csv", "1,3,480,1\n")), ParseError);
    CHECK_THROWS_AS(load_events(write_temp("ev_bad5.csv", "1,3,4,2\n")), ParseError);
    try {
        load_events(write_temp("ev_line.csv", "1,1,1,1\nbroken\n"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("polarity 0 reads as negative", "[events]") {
    const auto path = write_temp("ev_p0.csv", "7,1,2,0\n");
    CHECK(load_events(path)[0].p == -1);
}

TEST_CASE("binning downsamples and separates polarities", "[events]") {
    // two +1 events in bin 0 at (16,8) -> grid (2,1), channel 0
    std::vector<Event> ev{{300, 16, 8, 1}, {900, 16, 8, 1}};
    const auto r = bin_events(ev, 1, 2);
    REQUIRE(r.frames.size() == 2);
    CHECK(r.frames[0].at(0, 1, 2) == 2);
    CHECK(r.frames[0].total() == 2);
    CHECK(r.frames[1].total() == 0);
}

TEST_CASE("bin boundary is half open", "[events]") {
    std::vector<Event> ev{{1000, 8, 8, -1}};
    const auto r = bin_events(ev, 1, 2);
    CHECK(r.frames[0].total() == 0);
    CHECK(r.frames[1].at(1, 1, 1) == 1);
}

TEST_CASE("events beyond duration are dropped with a counter", "[events]") {
    std::vector<Event> ev{{500, 1, 1, 1}, {5000, 1, 1, 1}};
    const auto r = bin_events(ev, 1, 3);
    CHECK(r.dropped == 1);
    CHECK(r.frames[0].total() == 1);
}

TEST_CASE("random stream: count conservation against brute-force recount", "[events]") {
    std::mt19937_64 g(42);
    std::uniform_int_distribution<int> dx(0, 639), dy(0, 479), dt(0, 14999), dp(0, 1);
    std::vector<Event> ev;
    for (int i = 0; i < 10000; ++i)
        ev.push_back({dt(g), std::uint16_t(dx(g)), std::uint16_t(dy(g)),
                      std::int8_t(dp(g) ? 1 : -1)});
    std::stable_sort(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.t < b.t; });

    const int duration = 10;
    const auto r = bin_events(ev, 1, duration);

    // independent recount
    std::int64_t in_range = 0;
    for (const auto& e : ev)
        if (e.t < duration * 1000) ++in_range;
    std::uint64_t binned = 0;
    for (const auto& f : r.frames) binned += f.total();
    CHECK(binned == std::uint64_t(in_range));
    CHECK(r.dropped == std::int64_t(ev.size()) - in_range);

    // per-cell recount on one frame
    BinnedFrame ref(3);
    for (const auto& e : ev)
        if (e.t >= 3000 && e.t < 4000) ++ref.counts[event_cell(e)];
    CHECK(ref.counts == r.frames[3].counts);
}

TEST_CASE("binning is order-insensitive", "[events]") {
    std::mt19937_64 g(7);
    std::uniform_int_distribution<int> dx(0, 639), dy(0, 479), dt(0, 4999), dp(0, 1);
    std::vector<Event> ev;
    for (int i = 0; i < 2000; ++i)
        ev.push_back({dt(g), std::uint16_t(dx(g)), std::uint16_t(dy(g)),
                      std::int8_t(dp(g) ? 1 : -1)});
    auto sorted = ev;
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.t < b.t; });
    auto shuffled = ev;
    std::shuffle(shuffled.begin(), shuffled.end(), g);

    const auto a = bin_events(sorted, 1, 5);
    const auto b = bin_events(shuffled, 1, 5);
    for (int k = 0; k < 5; ++k) CHECK(a.frames[k].counts == b.frames[k].counts);
}

TEST_CASE("sparse binning matches dense binning", "[events]") {
    std::mt19937_64 g(99);
    std::uniform_int_distribution<int> dx(0, 639), dy(0, 479), dt(0, 7999), dp(0, 1);
    std::vector<Event> ev;
    for (int i = 0; i < 5000; ++i)
        ev.push_back({dt(g), std::uint16_t(dx(g)), std::uint16_t(dy(g)),
                      std::int8_t(dp(g) ? 1 : -1)});
    std::stable_sort(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.t < b.t; });

    const auto dense = bin_events(ev, 1, 8);
    std::int64_t dropped = 0;
    const auto sparse = bin_events_sparse(ev, 8, &dropped);
    CHECK(dropped == dense.dropped);
    for (int k = 0; k < 8; ++k) {
        BinnedFrame densified(k);
        for (const auto& [idx, count] : sparse[k].cells) densified.counts[idx] += count;
        CHECK(densified.counts == dense.frames[k].counts);
    }
}

TEST_CASE("downsampling covers exactly the 80x60 grid", "[events]") {
    CHECK(639 / 8 == 79);
    CHECK(479 / 8 == 59);
    Event e;
    e.x = 639;
    e.y = 479;
    e.p = -1;
    CHECK(event_cell(e) == (1 * 60 + 59) * 80 + 79);
}

TEST_CASE("event csv round-trips", "[events]") {
    std::vector<Event> ev{{0, 0, 0, 1}, {1500, 639, 479, -1}};
    const auto path = (std::filesystem::temp_directory_path() / "ev_rt.csv").string();
    save_events_csv(path, ev);
    const auto back = load_events(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].t == 1500);
    CHECK(back[1].x == 639);
    CHECK(back[1].p == -1);
}
