#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "sgaze/common.hpp"
#include "sgaze/events.hpp"
#include "sgaze/labels.hpp"

namespace sgaze {

// Synthetic scene: a dark pupil disk wandering over a bright field, with an
// eyelid occluder sweeping during blinks. Deliberately simple; it exists to
// exercise the pipeline end to end, not to model eyes faithfully.
struct SceneConfig {
    int sensor_w = kSensorWidth;
    int sensor_h = kSensorHeight;
    double pupil_radius = 36;      // sensor px
    double bg_intensity = 120;
    double pupil_intensity = 40;
    double lid_intensity = 95;
    double contrast_threshold = 0.35;  // log-intensity units
    double px_per_deg = 20;
    double sacc_amp_min_deg = 2, sacc_amp_max_deg = 12;
    double sacc_dur_slope_ms = 2.2, sacc_dur_offset_ms = 21;  // duration = slope*amp_deg + offset
    double fix_dur_min_ms = 150, fix_dur_max_ms = 500;
    double jitter_px = 0.15;  // fixation micro-movement (OU) sigma per ms
    double pursuit_prob = 0.25;
    double pursuit_speed_min = 100, pursuit_speed_max = 300;  // px/s
    double blink_rate_hz = 0.2;
    double blink_dur_min_ms = 120, blink_dur_max_ms = 250;
    int session_ms = 5000;
    std::uint64_t seed = 1;

    // Fixation targets stay this far from the sensor edge.
    double wander_margin() const {
        return pupil_radius + std::max(2.0, 0.0625 * std::min(sensor_w, sensor_h));
    }

    void validate() const {
        if (sensor_w <= 0 || sensor_h <= 0 || pupil_radius <= 0 || session_ms <= 0)
            throw ConfigError("scene geometry must be positive");
        if (pupil_intensity < 1 || bg_intensity < 1 || lid_intensity < 1)
            throw ConfigError("intensities must be >= 1");
        if (contrast_threshold <= 0) throw ConfigError("contrast threshold must be positive");
        if (2 * wander_margin() >= std::min(sensor_w, sensor_h))
            throw ConfigError("pupil too large for the sensor");
    }
};

// 1 kHz ground truth in sensor pixels.
struct GroundTruth {
    std::vector<std::array<float, 2>> pos;
    std::vector<std::uint8_t> blink;

    int size() const { return static_cast<int>(pos.size()); }
};

// Alternating fixations (OU jitter), minimum-jerk saccades and constant-
// velocity pursuit ramps, with Poisson blink onsets overlaid.
inline GroundTruth gen_trajectory(const SceneConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double margin = cfg.wander_margin();
    const double x0 = margin, x1 = cfg.sensor_w - 1 - margin;
    const double y0 = margin, y1 = cfg.sensor_h - 1 - margin;
    auto rand_target = [&](std::array<double, 2>) -> std::array<double, 2> {
        return {x0 + u01(rng) * (x1 - x0), y0 + u01(rng) * (y1 - y0)};
    };

    GroundTruth gt;
    gt.pos.resize(cfg.session_ms);
    gt.blink.assign(cfg.session_ms, 0);

    std::array<double, 2> anchor = rand_target({});
    std::array<double, 2> jit{0, 0};
    int t = 0;
    bool moving = false;
    std::array<double, 2> move_from{}, move_to{};
    int move_len = 0, move_t = 0;
    bool pursuit = false;
    int fix_left = int(cfg.fix_dur_min_ms +
                       u01(rng) * (cfg.fix_dur_max_ms - cfg.fix_dur_min_ms));

    while (t < cfg.session_ms) {
        std::array<double, 2> p;
        if (!moving) {
            // Ornstein-Uhlenbeck jitter around the fixation anchor.
            for (int k = 0; k < 2; ++k) {
                jit[k] += -0.05 * jit[k] + cfg.jitter_px * gauss(rng);
                jit[k] = std::clamp(jit[k], -3.0, 3.0);
            }
            p = {anchor[0] + jit[0], anchor[1] + jit[1]};
            if (--fix_left <= 0) {
                move_from = anchor;
                move_to = rand_target(anchor);
                pursuit = u01(rng) < cfg.pursuit_prob;
                const double dist = std::hypot(move_to[0] - move_from[0], move_to[1] - move_from[1]);
                if (pursuit) {
                    const double speed = cfg.pursuit_speed_min +
                                         u01(rng) * (cfg.pursuit_speed_max - cfg.pursuit_speed_min);
                    move_len = std::max(1, int(dist / speed * 1000.0));
                } else {
                    const double amp_deg = dist / cfg.px_per_deg;
                    move_len = std::max(1, int(cfg.sacc_dur_slope_ms * amp_deg +
                                               cfg.sacc_dur_offset_ms));
                }
                move_t = 0;
                moving = true;
                jit = {0, 0};
            }
        } else {
            ++move_t;
            const double tau = double(move_t) / double(move_len);
            // minimum-jerk for saccades, linear ramp for pursuit
            const double s = pursuit ? tau : tau * tau * tau * (10 - 15 * tau + 6 * tau * tau);
            p = {move_from[0] + (move_to[0] - move_from[0]) * s,
                 move_from[1] + (move_to[1] - move_from[1]) * s};
            if (move_t >= move_len) {
                moving = false;
                anchor = move_to;
                fix_left = int(cfg.fix_dur_min_ms +
                               u01(rng) * (cfg.fix_dur_max_ms - cfg.fix_dur_min_ms));
            }
        }
        gt.pos[t] = {static_cast<float>(std::clamp(p[0], x0, x1)),
                     static_cast<float>(std::clamp(p[1], y0, y1))};
        ++t;
    }

    // Blink schedule: Poisson onsets, uniform duration.
    int blink_left = 0;
    for (int i = 0; i < cfg.session_ms; ++i) {
        if (blink_left > 0) {
            gt.blink[i] = 1;
            --blink_left;
        } else if (u01(rng) < cfg.blink_rate_hz / 1000.0) {
            blink_left = int(cfg.blink_dur_min_ms +
                             u01(rng) * (cfg.blink_dur_max_ms - cfg.blink_dur_min_ms));
            gt.blink[i] = 1;
            --blink_left;
        }
    }
    return gt;
}

// 100 Hz export in the 80x60 working space, feeding the same interpolation
// path as real recordings.
inline LabelTrack export_labels_100hz(const GroundTruth& gt, const SceneConfig& cfg) {
    LabelTrack track;
    track.rate_hz = 100.0;
    const double sx = double(cfg.sensor_w) / kGridWidth;
    const double sy = double(cfg.sensor_h) / kGridHeight;
    for (int t = 0; t < gt.size(); t += 10) {
        LabelSample s;
        s.x = static_cast<float>(gt.pos[t][0] / sx);
        s.y = static_cast<float>(gt.pos[t][1] / sy);
        s.blink = gt.blink[t] != 0;
        track.samples.push_back(s);
    }
    return track;
}

namespace detail {

// Scene state at one instant: pupil center plus how far the eyelid has swept.
struct SceneState {
    double cx, cy;
    double lid_edge;  // rows [0, lid_edge) are occluded
};

// Log intensity at a pixel; disk and lid edges are antialiased over ~1 px.
inline double scene_logl(const SceneConfig& cfg, const SceneState& st, int px, int py) {
    const double d = std::hypot(px + 0.5 - st.cx, py + 0.5 - st.cy);
    const double cover = std::clamp(cfg.pupil_radius + 0.5 - d, 0.0, 1.0);
    double inten = cfg.bg_intensity + (cfg.pupil_intensity - cfg.bg_intensity) * cover;
    if (st.lid_edge > 0) {
        const double lid_cover = std::clamp(st.lid_edge - py, 0.0, 1.0);
        inten = inten * (1.0 - lid_cover) + cfg.lid_intensity * lid_cover;
    }
    return std::log(inten);
}

struct Rect {
    int x0, y0, x1, y1;  // half-open
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

inline Rect disk_rect(const SceneConfig& cfg, double cx, double cy) {
    const int m = int(cfg.pupil_radius) + 3;
    return {std::max(0, int(cx) - m), std::max(0, int(cy) - m),
            std::min(cfg.sensor_w, int(cx) + m + 1), std::min(cfg.sensor_h, int(cy) + m + 1)};
}

inline Rect union_rect(const Rect& a, const Rect& b) {
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
            std::max(a.y1, b.y1)};
}

}  // namespace detail

// DVS emulation: per pixel, an event fires each time the log intensity moves
// a full contrast threshold away from the level at that pixel's last event;
// the reference then steps by the threshold (possibly several events per
// update). Only pixels whose intensity can have changed are visited.
inline std::vector<Event> render_events(const GroundTruth& gt, const SceneConfig& cfg) {
    cfg.validate();
    const int W = cfg.sensor_w, H = cfg.sensor_h;
    const double C = cfg.contrast_threshold;

    // eyelid sweep per blink: close over the first 30%, hold, reopen
    std::vector<double> lid(gt.size(), 0.0);
    {
        int i = 0;
        while (i < gt.size()) {
            if (!gt.blink[i]) {
                ++i;
                continue;
            }
            int j = i;
            while (j < gt.size() && gt.blink[j]) ++j;
            const int dur = j - i;
            const double target = std::min(double(H), gt.pos[i][1] + cfg.pupil_radius + 16);
            const int close_len = std::max(1, int(0.3 * dur));
            const int open_start = dur - close_len;
            for (int k = 0; k < dur; ++k) {
                double e;
                if (k < close_len)
                    e = target * double(k + 1) / close_len;
                else if (k >= open_start)
                    e = target * double(dur - k - 1) / close_len;
                else
                    e = target;
                lid[i + k] = std::clamp(e, 0.0, double(H));
            }
            i = j;
        }
    }

    std::vector<float> ref(size_t(W) * H);
    detail::SceneState prev{gt.pos[0][0], gt.pos[0][1], lid[0]};
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            ref[size_t(y) * W + x] = static_cast<float>(detail::scene_logl(cfg, prev, x, y));

    std::vector<Event> events;
    auto emit_region = [&](const detail::Rect& r, const detail::SceneState& cur, int t_ms,
                           int& counter) {
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x) {
                const double L = detail::scene_logl(cfg, cur, x, y);
                float& rf = ref[size_t(y) * W + x];
                while (L - rf >= C) {
                    rf += static_cast<float>(C);
                    Event e;
                    e.t = std::int64_t(t_ms) * 1000 + std::min(counter++, 999);
                    e.x = std::uint16_t(x);
                    e.y = std::uint16_t(y);
                    e.p = 1;
                    events.push_back(e);
                }
                while (rf - L >= C) {
                    rf -= static_cast<float>(C);
                    Event e;
                    e.t = std::int64_t(t_ms) * 1000 + std::min(counter++, 999);
                    e.x = std::uint16_t(x);
                    e.y = std::uint16_t(y);
                    e.p = -1;
                    events.push_back(e);
                }
            }
    };

    for (int t = 1; t < gt.size(); ++t) {
        const detail::SceneState cur{gt.pos[t][0], gt.pos[t][1], lid[t]};
        int counter = 0;
        const detail::Rect disks = detail::union_rect(detail::disk_rect(cfg, prev.cx, prev.cy),
                                                      detail::disk_rect(cfg, cur.cx, cur.cy));
        emit_region(disks, cur, t, counter);
        if (cur.lid_edge != prev.lid_edge || cur.lid_edge > 0) {
            const double lo = std::min(prev.lid_edge, cur.lid_edge);
            const double hi = std::max(prev.lid_edge, cur.lid_edge);
            detail::Rect band{0, std::max(0, int(lo) - 2), W, std::min(H, int(hi) + 3)};
            if (!band.empty()) emit_region(band, cur, t, counter);
        }
        prev = cur;
    }
    return events;
}

// Ground truth downsampled straight to 1 kHz grid-space labels (used by
// in-memory pipelines; file-based flows go through the 100 Hz export and
// spline interpolation instead).
inline LabelTrack ground_truth_labels_1khz(const GroundTruth& gt, const SceneConfig& cfg) {
    LabelTrack track;
    track.rate_hz = 1000.0;
    const double sx = double(cfg.sensor_w) / kGridWidth;
    const double sy = double(cfg.sensor_h) / kGridHeight;
    track.samples.resize(gt.size());
    for (int t = 0; t < gt.size(); ++t) {
        track.samples[t].x = static_cast<float>(gt.pos[t][0] / sx);
        track.samples[t].y = static_cast<float>(gt.pos[t][1] / sy);
        track.samples[t].blink = gt.blink[t] != 0;
    }
    return track;
}

}  // namespace sgaze
