#pragma once

#include <vector>

#include "sgaze/labels.hpp"

namespace sgaze {

struct LossTerms {
    double l_pos = 0;
    double l_vel = 0;
    bool vel_defined = true;  // false when the window has a single frame
    double total() const { return l_pos + l_vel; }
};

// Combined position + velocity loss over normalized coordinates, laid out
// (steps, 2). L_pos is the MSE of positions; L_vel the MSE of first-order
// temporal differences, which cancels constant offsets and penalizes jitter.
// `grad`, when non-null, receives dL/dpred (same layout, overwritten).
// `mask`, when non-null, marks frames included in the loss (blink exclusion);
// velocity terms need both endpoints included.
template <typename T>
inline LossTerms loss_and_grad(const std::vector<T>& pred, const std::vector<T>& label,
                               bool velocity_term,
                               std::type_identity_t<std::vector<T>>* grad = nullptr,
                               const std::vector<std::uint8_t>* mask = nullptr) {
    const size_t n = pred.size();
    if (n != label.size() || n % 2 != 0) throw ShapeError("loss: prediction/label size mismatch");
    const int steps = static_cast<int>(n / 2);
    if (grad) grad->assign(n, T(0));

    LossTerms terms;
    auto included = [&](int t) { return !mask || (*mask)[t] != 0; };

    std::int64_t pos_cnt = 0;
    double pos_sum = 0;
    for (int t = 0; t < steps; ++t) {
        if (!included(t)) continue;
        for (int k = 0; k < 2; ++k) {
            const double d = double(pred[t * 2 + k]) - double(label[t * 2 + k]);
            pos_sum += d * d;
            ++pos_cnt;
        }
    }
    terms.l_pos = pos_cnt ? pos_sum / double(pos_cnt) : 0.0;
    if (grad && pos_cnt) {
        const double f = 2.0 / double(pos_cnt);
        for (int t = 0; t < steps; ++t) {
            if (!included(t)) continue;
            for (int k = 0; k < 2; ++k)
                (*grad)[t * 2 + k] +=
                    static_cast<T>(f * (double(pred[t * 2 + k]) - double(label[t * 2 + k])));
        }
    }

    if (steps < 2) {
        terms.vel_defined = false;
        terms.l_vel = 0.0;
        return terms;
    }
    if (velocity_term) {
        std::int64_t vel_cnt = 0;
        double vel_sum = 0;
        for (int t = 1; t < steps; ++t) {
            if (!included(t) || !included(t - 1)) continue;
            for (int k = 0; k < 2; ++k) {
                const double dp = double(pred[t * 2 + k]) - double(pred[(t - 1) * 2 + k]);
                const double dl = double(label[t * 2 + k]) - double(label[(t - 1) * 2 + k]);
                const double d = dp - dl;
                vel_sum += d * d;
                ++vel_cnt;
            }
        }
        terms.l_vel = vel_cnt ? vel_sum / double(vel_cnt) : 0.0;
        if (grad && vel_cnt) {
            const double f = 2.0 / double(vel_cnt);
            // d L_vel/d pred[t] = f * (d_t - d_{t+1}); single write per slot
            auto diff = [&](int t, int k) -> double {
                if (t < 1 || t >= steps || !included(t) || !included(t - 1)) return 0.0;
                const double dp = double(pred[t * 2 + k]) - double(pred[(t - 1) * 2 + k]);
                const double dl = double(label[t * 2 + k]) - double(label[(t - 1) * 2 + k]);
                return dp - dl;
            };
            for (int t = 0; t < steps; ++t)
                for (int k = 0; k < 2; ++k)
                    (*grad)[t * 2 + k] += static_cast<T>(f * (diff(t, k) - diff(t + 1, k)));
        }
    }
    return terms;
}

// Labels as normalized (x/80, y/60) pairs for the loss.
inline std::vector<float> normalize_labels(const std::vector<LabelSample>& labels) {
    std::vector<float> out(labels.size() * 2);
    for (size_t i = 0; i < labels.size(); ++i) {
        out[i * 2] = labels[i].x / float(kGridWidth);
        out[i * 2 + 1] = labels[i].y / float(kGridHeight);
    }
    return out;
}

template <typename T>
inline std::vector<T> normalize_labels_as(const std::vector<LabelSample>& labels) {
    std::vector<T> out(labels.size() * 2);
    for (size_t i = 0; i < labels.size(); ++i) {
        out[i * 2] = T(labels[i].x) / T(kGridWidth);
        out[i * 2 + 1] = T(labels[i].y) / T(kGridHeight);
    }
    return out;
}

}  // namespace sgaze
