#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "sgaze/labels.hpp"

namespace sgaze {

// P-accuracy and mean Euclidean distance in the 80x60 working space, with
// blink frames excluded from both numerator and denominator. With zero
// scored frames all values are 0 (NaN-free) and frames_scored says so.
struct MetricReport {
    std::map<int, double> p_acc;  // tolerance -> fraction within
    double euclidean = 0.0;
    std::int64_t frames_scored = 0;
    std::int64_t frames_blinked = 0;
};

inline const std::vector<int>& default_tolerances() {
    static const std::vector<int> t{1, 3, 5, 10};
    return t;
}

// Incremental metric accumulator so streaming evaluation can pool frames
// across sessions without keeping every prediction.
struct MetricAccum {
    std::vector<int> tolerances = default_tolerances();
    std::vector<std::int64_t> within;
    double dist_sum = 0.0;
    std::int64_t scored = 0;
    std::int64_t blinked = 0;

    MetricAccum() : within(tolerances.size(), 0) {}
    explicit MetricAccum(std::vector<int> tol) : tolerances(std::move(tol)), within(tolerances.size(), 0) {}

    void add(double pred_x, double pred_y, const LabelSample& label) {
        if (label.blink) {
            ++blinked;
            return;
        }
        const double dx = pred_x - double(label.x);
        const double dy = pred_y - double(label.y);
        const double d = std::sqrt(dx * dx + dy * dy);
        dist_sum += d;
        ++scored;
        for (size_t i = 0; i < tolerances.size(); ++i)
            if (d <= double(tolerances[i])) ++within[i];
    }

    MetricReport report() const {
        MetricReport r;
        r.frames_scored = scored;
        r.frames_blinked = blinked;
        r.euclidean = scored ? dist_sum / double(scored) : 0.0;
        for (size_t i = 0; i < tolerances.size(); ++i)
            r.p_acc[tolerances[i]] = scored ? double(within[i]) / double(scored) : 0.0;
        return r;
    }
};

// Batch evaluation of predictions (pixels, laid out (steps, 2)) against
// labels with blink flags.
template <typename T>
inline MetricReport evaluate(const std::vector<T>& pred_px, const std::vector<LabelSample>& labels,
                             const std::vector<int>& tolerances = default_tolerances()) {
    if (pred_px.size() != labels.size() * 2) throw ShapeError("evaluate: size mismatch");
    MetricAccum acc(tolerances);
    for (size_t i = 0; i < labels.size(); ++i)
        acc.add(double(pred_px[i * 2]), double(pred_px[i * 2 + 1]), labels[i]);
    return acc.report();
}

}  // namespace sgaze
