#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "sgaze/common.hpp"
#include "sgaze/labels.hpp"
#include "sgaze/tensor.hpp"

namespace sgaze {

struct CutoutConfig {
    int count = 1;
    int max_extent_xy = 20;
    int max_extent_t = 50;
};

struct AugmentConfig {
    double p_hflip = 0.5;
    double p_vflip = 0.5;
    double p_tflip = 0.5;
    int max_spatial_shift = 8;   // pixels on the 80x60 grid
    int max_temporal_shift = 50; // bins; applied by rolling the window start
    CutoutConfig cutout;
    std::uint64_t rng_seed = 0;

    void validate(int window_len) const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(p_hflip) || !prob(p_vflip) || !prob(p_tflip))
            throw ConfigError("augment probabilities must be in [0,1]");
        if (max_spatial_shift < 0 || max_spatial_shift > kGridWidth)
            throw ConfigError("max_spatial_shift out of range");
        if (cutout.count < 0 || cutout.max_extent_xy <= 0 || cutout.max_extent_t <= 0 ||
            cutout.max_extent_xy > kGridWidth || cutout.max_extent_t > std::max(window_len, 1))
            throw ConfigError("cutout extents out of range");
    }
};

// Mirrors the window along x and maps label x -> 79 - x. Involution.
template <typename T>
inline void hflip(Tensor4<T>& w, std::vector<LabelSample>& labels) {
    for (int t = 0; t < w.n; ++t)
        for (int c = 0; c < w.c; ++c)
            for (int y = 0; y < w.h; ++y) {
                T* row = w.channel(t, c) + static_cast<size_t>(y) * w.w;
                std::reverse(row, row + w.w);
            }
    for (LabelSample& s : labels) s.x = static_cast<float>(kGridWidth - 1) - s.x;
}

// Mirrors along y and maps label y -> 59 - y. Involution.
template <typename T>
inline void vflip(Tensor4<T>& w, std::vector<LabelSample>& labels) {
    for (int t = 0; t < w.n; ++t)
        for (int c = 0; c < w.c; ++c) {
            T* ch = w.channel(t, c);
            for (int y = 0; y < w.h / 2; ++y)
                std::swap_ranges(ch + static_cast<size_t>(y) * w.w,
                                 ch + static_cast<size_t>(y + 1) * w.w,
                                 ch + static_cast<size_t>(w.h - 1 - y) * w.w);
        }
    for (LabelSample& s : labels) s.y = static_cast<float>(kGridHeight - 1) - s.y;
}

// Reverses time and swaps the polarity channels so reversed motion stays
// physically consistent. Labels are reversed with the frames. Involution.
template <typename T>
inline void tflip(Tensor4<T>& w, std::vector<LabelSample>& labels) {
    const size_t plane = static_cast<size_t>(w.h) * w.w;
    for (int lo = 0, hi = w.n - 1; lo <= hi; ++lo, --hi) {
        for (int c = 0; c < w.c; ++c) {
            T* a = w.channel(lo, c);
            T* b = w.channel(hi, 1 - c);
            if (lo == hi && c == 1) break;  // middle frame: swap its channels once
            std::swap_ranges(a, a + plane, b);
        }
    }
    std::reverse(labels.begin(), labels.end());
}

// Translates counts by (dx, dy) with zero fill; shifted-out counts are
// discarded. Labels move with the content and are clamped to the grid.
template <typename T>
inline void shift(Tensor4<T>& w, std::vector<LabelSample>& labels, int dx, int dy) {
    if (dx == 0 && dy == 0) return;
    Tensor4<T> out(w.n, w.c, w.h, w.w);
    for (int t = 0; t < w.n; ++t)
        for (int c = 0; c < w.c; ++c) {
            const T* src = w.channel(t, c);
            T* dst = out.channel(t, c);
            for (int y = 0; y < w.h; ++y) {
                const int sy = y - dy;
                if (sy < 0 || sy >= w.h) continue;
                for (int x = 0; x < w.w; ++x) {
                    const int sx = x - dx;
                    if (sx < 0 || sx >= w.w) continue;
                    dst[static_cast<size_t>(y) * w.w + x] = src[static_cast<size_t>(sy) * w.w + sx];
                }
            }
        }
    w = std::move(out);
    for (LabelSample& s : labels) {
        s.x = std::clamp(s.x + dx, 0.f, float(kGridWidth - 1));
        s.y = std::clamp(s.y + dy, 0.f, float(kGridHeight - 1));
    }
}

// Zeroes one axis-aligned (t, x, y) box in both channels.
template <typename T>
inline void cutout_box(Tensor4<T>& w, int t0, int lt, int x0, int lx, int y0, int ly) {
    for (int t = t0; t < t0 + lt; ++t)
        for (int c = 0; c < w.c; ++c) {
            T* ch = w.channel(t, c);
            for (int y = y0; y < y0 + ly; ++y)
                std::fill(ch + static_cast<size_t>(y) * w.w + x0,
                          ch + static_cast<size_t>(y) * w.w + x0 + lx, T(0));
        }
}

// Zeroes `cfg.count` random boxes.
template <typename T, typename Rng>
inline void event_cutout(Tensor4<T>& w, const CutoutConfig& cfg, Rng& rng) {
    for (int b = 0; b < cfg.count; ++b) {
        const int lt = std::uniform_int_distribution<int>(1, std::min(cfg.max_extent_t, w.n))(rng);
        const int lx = std::uniform_int_distribution<int>(1, std::min(cfg.max_extent_xy, w.w))(rng);
        const int ly = std::uniform_int_distribution<int>(1, std::min(cfg.max_extent_xy, w.h))(rng);
        const int t0 = std::uniform_int_distribution<int>(0, w.n - lt)(rng);
        const int x0 = std::uniform_int_distribution<int>(0, w.w - lx)(rng);
        const int y0 = std::uniform_int_distribution<int>(0, w.h - ly)(rng);
        cutout_box(w, t0, lt, x0, lx, y0, ly);
    }
}

// Temporal shift policy: roll the window start inside the session so frames
// and labels always exist; the draw collapses to 0 when the session leaves
// no room.
template <typename Rng>
inline int rolled_window_start(int start, int window_len, int session_len, int max_shift, Rng& rng) {
    if (max_shift <= 0) return start;
    const int lo = std::max(0, start - max_shift);
    const int hi = std::min(session_len - window_len, start + max_shift);
    if (hi <= lo) return start;
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Applies the stochastic augmentation pipeline in place with a caller-owned
// rng (one substream per window).
template <typename T>
inline void augment_window(Tensor4<T>& w, std::vector<LabelSample>& labels,
                           const AugmentConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < cfg.p_hflip) hflip(w, labels);
    if (u(rng) < cfg.p_vflip) vflip(w, labels);
    if (u(rng) < cfg.p_tflip) tflip(w, labels);
    if (cfg.max_spatial_shift > 0) {
        std::uniform_int_distribution<int> d(-cfg.max_spatial_shift, cfg.max_spatial_shift);
        shift(w, labels, d(rng), d(rng));
    }
    if (cfg.cutout.count > 0) event_cutout(w, cfg.cutout, rng);
}

// Same pipeline with the rng substream derived from (cfg.rng_seed, index).
template <typename T>
inline void augment_window(Tensor4<T>& w, std::vector<LabelSample>& labels,
                           const AugmentConfig& cfg, std::uint64_t stream_index) {
    std::mt19937_64 rng(substream_seed(cfg.rng_seed, stream_index));
    augment_window(w, labels, cfg, rng);
}

}  // namespace sgaze
