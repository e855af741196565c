#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "sgaze/common.hpp"
#include "sgaze/events.hpp"
#include "sgaze/spline.hpp"

namespace sgaze {

// Pupil-center trajectory in the 80x60 working space at a fixed rate.
struct LabelSample {
    float x = 0.f;
    float y = 0.f;
    bool blink = false;
};

struct LabelTrack {
    double rate_hz = 0.0;
    std::vector<LabelSample> samples;

    int size() const { return static_cast<int>(samples.size()); }
    double duration_ms() const {
        return samples.empty() ? 0.0 : (samples.size() - 1) * 1000.0 / rate_hz;
    }
};

// Reads a label CSV with rows `t_us,x,y,blink`, x/y in sensor pixels.
// Coordinates are divided by `scale` (default 8) into the 80x60 space and
// clamped to the grid. Timestamps must be uniformly spaced and increasing;
// the rate is inferred from the spacing.
inline LabelTrack load_labels(const std::string& path, double scale = kDownsample) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open label file: " + path);
    LabelTrack track;
    std::vector<std::int64_t> times;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        if (line_no == 1 && detail::looks_like_header(sv)) continue;
        std::string_view f[4];
        if (detail::split_csv(sv, f, 4) != 4)
            throw ParseError("expected 4 fields `t_us,x,y,blink`", line_no);
        std::int64_t t;
        double x, y;
        int blink;
        if (!detail::parse_num(f[0], t) || !detail::parse_num(f[1], x) ||
            !detail::parse_num(f[2], y) || !detail::parse_num(f[3], blink))
            throw ParseError("malformed label row", line_no);
        LabelSample s;
        s.x = static_cast<float>(std::clamp(x / scale, 0.0, double(kGridWidth) - 1e-3));
        s.y = static_cast<float>(std::clamp(y / scale, 0.0, double(kGridHeight) - 1e-3));
        s.blink = blink != 0;
        times.push_back(t);
        track.samples.push_back(s);
    }
    if (times.size() < 2) throw ParseError("label file needs at least 2 samples: " + path);
    const std::int64_t dt = times[1] - times[0];
    if (dt <= 0) throw ParseError("label timestamps must be increasing: " + path);
    for (size_t i = 1; i < times.size(); ++i) {
        const std::int64_t d = times[i] - times[i - 1];
        if (std::llabs(d - dt) > dt / 100 + 1)
            throw ParseError("label timestamps must be uniformly spaced",
                             static_cast<int>(i + 1));
    }
    track.rate_hz = 1e6 / static_cast<double>(dt);
    return track;
}

inline void save_labels_csv(const std::string& path, const LabelTrack& track,
                            double scale = kDownsample) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write label file: " + path);
    out << "t_us,x,y,blink\n";
    const double dt_us = 1e6 / track.rate_hz;
    for (size_t i = 0; i < track.samples.size(); ++i) {
        const LabelSample& s = track.samples[i];
        out << static_cast<std::int64_t>(std::llround(i * dt_us)) << ','
            << s.x * scale << ',' << s.y * scale << ',' << (s.blink ? 1 : 0) << '\n';
    }
}

// Upsamples a track to `target_rate` with a natural interpolating cubic
// spline per coordinate. Blink flags are copied from the nearest source
// sample. Needs at least 4 samples.
inline LabelTrack interpolate_labels(const LabelTrack& track, double target_rate = 1000.0) {
    const int n = track.size();
    if (n < 4) throw std::invalid_argument("interpolation needs at least 4 label samples");
    const double src_dt = 1000.0 / track.rate_hz;  // ms between knots
    std::vector<double> t(n), xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        t[i] = i * src_dt;
        xs[i] = track.samples[i].x;
        ys[i] = track.samples[i].y;
    }
    CubicSpline sx(t, xs), sy(t, ys);

    LabelTrack out;
    out.rate_hz = target_rate;
    const double dst_dt = 1000.0 / target_rate;
    const double end = t.back();
    const int m = static_cast<int>(std::floor(end / dst_dt + 1e-9)) + 1;
    out.samples.resize(m);
    for (int j = 0; j < m; ++j) {
        const double tj = j * dst_dt;
        LabelSample s;
        s.x = static_cast<float>(sx(tj));
        s.y = static_cast<float>(sy(tj));
        const int near = std::clamp(static_cast<int>(std::llround(tj / src_dt)), 0, n - 1);
        s.blink = track.samples[near].blink;
        out.samples[j] = s;
    }
    return out;
}

}  // namespace sgaze
