#pragma once

#include <string>
#include <vector>

#include "sgaze/events.hpp"
#include "sgaze/labels.hpp"
#include "sgaze/tensor.hpp"

namespace sgaze {

// One recording: sparsely binned 1 ms frames plus 1 kHz labels of the same
// length. Frames past the last event stay empty; the label track defines the
// session duration.
struct Session {
    std::vector<SparseFrame> frames;
    LabelTrack labels;  // 1 kHz
    std::int64_t dropped_events = 0;

    int duration_ms() const { return static_cast<int>(frames.size()); }
};

// Loads events + 100 Hz labels and aligns them: labels are upsampled to
// 1 kHz, events are binned over the label-covered duration.
inline Session load_session(const std::string& events_path, const std::string& labels_path,
                            double label_scale = kDownsample) {
    Session s;
    const std::vector<Event> events = load_events(events_path);
    const LabelTrack raw = load_labels(labels_path, label_scale);
    s.labels = interpolate_labels(raw, 1000.0);
    const int duration = s.labels.size();
    s.frames = bin_events_sparse(events, duration, &s.dropped_events);
    return s;
}

inline Session make_session(const std::vector<Event>& events, const LabelTrack& labels_1khz) {
    Session s;
    s.labels = labels_1khz;
    s.frames = bin_events_sparse(events, s.labels.size(), &s.dropped_events);
    return s;
}

// Start offsets of all sliding windows: 0, stride, 2*stride, ... with
// start + window <= duration. A session shorter than one window yields none.
inline std::vector<int> window_starts(int duration_ms, int window_ms, int stride_ms) {
    std::vector<int> starts;
    if (window_ms <= 0 || stride_ms <= 0) throw std::invalid_argument("window/stride must be positive");
    for (int s = 0; s + window_ms <= duration_ms; s += stride_ms) starts.push_back(s);
    return starts;
}

// Densifies frames [start, start+len) into a (len, 2, 60, 80) tensor.
template <typename T>
inline Tensor4<T> materialize_window(const Session& s, int start, int len) {
    Tensor4<T> w(len, 2, kGridHeight, kGridWidth);
    const int plane = 2 * kGridHeight * kGridWidth;
    for (int t = 0; t < len; ++t) {
        T* dst = w.data.data() + static_cast<size_t>(t) * plane;
        for (const auto& [idx, count] : s.frames[start + t].cells)
            dst[idx] = static_cast<T>(count);
    }
    return w;
}

inline std::vector<LabelSample> window_labels(const Session& s, int start, int len) {
    return std::vector<LabelSample>(s.labels.samples.begin() + start,
                                    s.labels.samples.begin() + start + len);
}

}  // namespace sgaze
