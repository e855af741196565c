#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "sgaze/common.hpp"
#include "sgaze/tensor.hpp"

namespace sgaze {

// One DVS event. Timestamp in microseconds, coordinates in sensor space,
// polarity +1 (brighter) or -1 (darker).
struct Event {
    std::int64_t t = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t p = 1;
};

// Event counts of one 1 ms bin on the 2x60x80 grid.
// Channel 0 counts positive events, channel 1 negative.
struct BinnedFrame {
    int bin_index = 0;
    std::vector<std::uint32_t> counts;  // size 2*60*80, layout (c, y, x)

    BinnedFrame() : counts(2 * kGridHeight * kGridWidth, 0) {}
    explicit BinnedFrame(int idx) : bin_index(idx), counts(2 * kGridHeight * kGridWidth, 0) {}

    std::uint32_t& at(int ch, int y, int x) {
        return counts[(static_cast<size_t>(ch) * kGridHeight + y) * kGridWidth + x];
    }
    std::uint32_t at(int ch, int y, int x) const {
        return counts[(static_cast<size_t>(ch) * kGridHeight + y) * kGridWidth + x];
    }
    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto v : counts) s += v;
        return s;
    }
};

// Sparse per-bin event counts; index = c*4800 + y*80 + x (fits uint16).
struct SparseFrame {
    std::vector<std::pair<std::uint16_t, std::uint16_t>> cells;  // (index, count)
};

struct BinResult {
    std::vector<BinnedFrame> frames;
    std::int64_t dropped = 0;  // events at or beyond duration
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
inline bool parse_num(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is available but be conservative with locales anyway
        char* end = nullptr;
        std::string tmp(s);
        out = static_cast<T>(std::strtod(tmp.c_str(), &end));
        return end == tmp.c_str() + tmp.size();
    } else {
        auto ss = s;
        bool neg = false;
        if (!ss.empty() && (ss.front() == '+' || ss.front() == '-')) {
            neg = ss.front() == '-';
            ss.remove_prefix(1);
        }
        long long v = 0;
        auto [ptr, ec] = std::from_chars(ss.data(), ss.data() + ss.size(), v);
        if (ec != std::errc() || ptr != ss.data() + ss.size()) return false;
        out = static_cast<T>(neg ? -v : v);
        return true;
    }
}

inline size_t split_csv(std::string_view line, std::string_view* out, size_t max_fields) {
    size_t n = 0;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (n < max_fields) out[n] = line.substr(start, i - start);
            ++n;
            start = i + 1;
        }
    }
    return n;
}

// A first line whose leading field is not a number is a header.
inline bool looks_like_header(std::string_view line) {
    std::string_view f[1];
    split_csv(line, f, 1);
    double v;
    return !parse_num(f[0], v);
}

}  // namespace detail

// Reads an event CSV with rows `t_us,x,y,p`. An optional header line is
// skipped. Output is stably sorted by timestamp. Polarity accepts 1/+1 for
// positive and -1/0 for negative. Coordinates outside 640x480 are rejected.
inline std::vector<Event> load_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open event file: " + path);
    std::vector<Event> events;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        if (line_no == 1 && detail::looks_like_header(sv)) continue;
        std::string_view f[4];
        if (detail::split_csv(sv, f, 4) != 4)
            throw ParseError("expected 4 fields `t_us,x,y,p`", line_no);
        std::int64_t t;
        int x, y, p;
        if (!detail::parse_num(f[0], t) || !detail::parse_num(f[1], x) ||
            !detail::parse_num(f[2], y) || !detail::parse_num(f[3], p))
            throw ParseError("malformed event row", line_no);
        if (t < 0) throw ParseError("negative timestamp", line_no);
        if (x < 0 || x >= kSensorWidth || y < 0 || y >= kSensorHeight)
            throw ParseError("coordinates outside 640x480 sensor", line_no);
        if (p != 1 && p != -1 && p != 0)
            throw ParseError("polarity must be 1, -1 or 0", line_no);
        Event e;
        e.t = t;
        e.x = static_cast<std::uint16_t>(x);
        e.y = static_cast<std::uint16_t>(y);
        e.p = (p == 1) ? std::int8_t(1) : std::int8_t(-1);
        events.push_back(e);
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return events;
}

inline void save_events_csv(const std::string& path, const std::vector<Event>& events) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write event file: " + path);
    out << "t_us,x,y,p\n";
    for (const Event& e : events)
        out << e.t << ',' << e.x << ',' << e.y << ',' << int(e.p) << '\n';
}

// Flat cell index on the binned grid for one event after 8x downsampling.
inline int event_cell(const Event& e) {
    const int gx = e.x / kDownsample;
    const int gy = e.y / kDownsample;
    const int ch = (e.p > 0) ? 0 : 1;
    return (ch * kGridHeight + gy) * kGridWidth + gx;
}

// Bins sorted events into consecutive `bin_ms` frames covering
// [0, duration_ms). Frame k holds events with k*bin <= t < (k+1)*bin after
// spatial downsampling x -> x/8, y -> y/8; channel selected by polarity.
// Events at or beyond the duration are dropped and counted.
inline BinResult bin_events(const std::vector<Event>& events, int bin_ms, int duration_ms) {
    if (bin_ms <= 0 || duration_ms <= 0) throw std::invalid_argument("bin/duration must be positive");
    const int n_bins = (duration_ms + bin_ms - 1) / bin_ms;
    BinResult r;
    r.frames.reserve(n_bins);
    for (int k = 0; k < n_bins; ++k) r.frames.emplace_back(k);
    const std::int64_t bin_us = static_cast<std::int64_t>(bin_ms) * 1000;
    const std::int64_t end_us = static_cast<std::int64_t>(duration_ms) * 1000;
    for (const Event& e : events) {
        if (e.t >= end_us) {
            ++r.dropped;
            continue;
        }
        const int k = static_cast<int>(e.t / bin_us);
        ++r.frames[k].counts[event_cell(e)];
    }
    return r;
}

// Same binning contract with sparse output; used for long sessions.
inline std::vector<SparseFrame> bin_events_sparse(const std::vector<Event>& events, int duration_ms,
                                                  std::int64_t* dropped = nullptr) {
    std::vector<SparseFrame> frames(duration_ms);
    const std::int64_t end_us = static_cast<std::int64_t>(duration_ms) * 1000;
    std::int64_t drop = 0;
    std::vector<std::uint16_t> scratch;
    size_t i = 0;
    const size_t n = events.size();
    for (int k = 0; k < duration_ms; ++k) {
        const std::int64_t hi = static_cast<std::int64_t>(k + 1) * 1000;
        scratch.clear();
        while (i < n && events[i].t < hi) {
            scratch.push_back(static_cast<std::uint16_t>(event_cell(events[i])));
            ++i;
        }
        std::sort(scratch.begin(), scratch.end());
        auto& cells = frames[k].cells;
        for (size_t j = 0; j < scratch.size();) {
            size_t j2 = j;
            while (j2 < scratch.size() && scratch[j2] == scratch[j]) ++j2;
            cells.emplace_back(scratch[j], static_cast<std::uint16_t>(j2 - j));
            j = j2;
        }
    }
    while (i < n) {
        if (events[i].t >= end_us) ++drop;
        ++i;
    }
    if (dropped) *dropped = drop;
    return frames;
}

}  // namespace sgaze
