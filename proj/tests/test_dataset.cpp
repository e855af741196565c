#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgaze/dataset.hpp"

using namespace sgaze;

namespace {
Session random_session(int duration_ms, int n_events, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<int> dx(0, 639), dy(0, 479), dp(0, 1);
    std::uniform_int_distribution<std::int64_t> dt(0, std::int64_t(duration_ms) * 1000 - 1);
    std::vector<Event> ev;
    for (int i = 0; i < n_events; ++i)
        ev.push_back({dt(g), std::uint16_t(dx(g)), std::uint16_t(dy(g)),
                      std::int8_t(dp(g) ? 1 : -1)});
    std::stable_sort(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.t < b.t; });
    LabelTrack labels;
    labels.rate_hz = 1000;
    labels.samples.assign(duration_ms, {40.f, 30.f, false});
    return make_session(ev, labels);
}
}  // namespace

TEST_CASE("window count formula", "[dataset]") {
    CHECK(window_starts(452, 450, 1) == std::vector<int>{0, 1, 2});
    CHECK(window_starts(449, 450, 1).empty());
    CHECK(window_starts(450, 450, 1) == std::vector<int>{0});
    // ablation stride: windows at 0 and 50
    CHECK(window_starts(500, 450, 50) == std::vector<int>{0, 50});
}

TEST_CASE("materialized windows preserve event counts", "[dataset]") {
    const Session s = random_session(100, 5000, 17);
    const auto w = materialize_window<float>(s, 20, 50);
    REQUIRE(w.n == 50);
    double total = 0;
    for (float v : w.data) total += v;
    std::int64_t want = 0;
    for (int t = 20; t < 70; ++t)
        for (const auto& [idx, c] : s.frames[t].cells) want += c;
    CHECK(std::int64_t(total) == want);
}

TEST_CASE("window labels align with frame indices", "[dataset]") {
    Session s = random_session(30, 100, 18);
    for (int t = 0; t < 30; ++t) s.labels.samples[t].x = float(t);
    const auto labels = window_labels(s, 5, 10);
    REQUIRE(labels.size() == 10);
    CHECK(labels.front().x == 5.0f);
    CHECK(labels.back().x == 14.0f);
}

TEST_CASE("session duration is label-limited and drops late events", "[dataset]") {
    std::vector<Event> ev{{0, 1, 1, 1}, {int64_t(40) * 1000, 1, 1, 1}};
    LabelTrack labels;
    labels.rate_hz = 1000;
    labels.samples.assign(20, {1.f, 1.f, false});
    const Session s = make_session(ev, labels);
    CHECK(s.duration_ms() == 20);
    CHECK(s.dropped_events == 1);
}
