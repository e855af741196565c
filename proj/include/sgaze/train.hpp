#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <span>
#include <vector>

#include "sgaze/adam.hpp"
#include "sgaze/augment.hpp"
#include "sgaze/dataset.hpp"
#include "sgaze/loss.hpp"
#include "sgaze/metrics.hpp"
#include "sgaze/model.hpp"
#include "sgaze/stream.hpp"

namespace sgaze {

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 40;
    int window_ms = 450;
    int stride_ms = 1;
    int batch = 32;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 1;
    int max_steps_per_epoch = 0;  // 0 = every window each epoch
    bool velocity_loss = true;    // false = spatial-MSE-only ablation
    bool exclude_blinks_from_loss = false;
    double grad_clip = 0.0;  // L2 norm cap, 0 = off
    bool augment = true;
    bool verbose = false;

    void validate() const {
        if (lr <= 0 || epochs <= 0 || window_ms <= 0 || stride_ms <= 0 || batch <= 0)
            throw ConfigError("train config values must be positive");
    }
};

struct EpochStats {
    int epoch = 0;
    double loss = 0, l_pos = 0, l_vel = 0;
    MetricReport val;
};

template <typename T>
struct TrainResult {
    Network<T> net;  // parameters at peak validation performance
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_euclidean = 0;
    std::int64_t skipped_steps = 0;
};

// Streaming evaluation: every session is replayed as an uninterrupted
// stream with carried membrane state; frames pool into one report.
// `stats_out`, when given, receives step-weighted mean activity.
template <typename T>
inline MetricReport evaluate_streaming(const Network<T>& net, std::span<const Session> sessions,
                                       ActivityStats* stats_out = nullptr) {
    MetricAccum acc;
    ActivityStats merged;
    for (const Session& s : sessions) {
        StreamEngine<T> engine(net);
        const std::vector<T> preds = stream_session(engine, s);
        for (size_t k = 0; k < s.frames.size(); ++k)
            acc.add(double(preds[k * 2]), double(preds[k * 2 + 1]), s.labels.samples[k]);
        if (stats_out && engine.clock() > 0) {
            const ActivityStats a = engine.snapshot_activity();
            if (merged.conv_in_occ.empty()) {
                merged.conv_in_occ.assign(a.conv_in_occ.size(), 0.0);
                merged.lif_rate.assign(a.lif_rate.size(), 0.0);
            }
            for (size_t i = 0; i < a.conv_in_occ.size(); ++i)
                merged.conv_in_occ[i] += a.conv_in_occ[i] * double(a.steps);
            for (size_t i = 0; i < a.lif_rate.size(); ++i)
                merged.lif_rate[i] += a.lif_rate[i] * double(a.steps);
            merged.flatten_occ += a.flatten_occ * double(a.steps);
            merged.steps += a.steps;
        }
    }
    if (stats_out) {
        if (merged.steps > 0) {
            for (double& v : merged.conv_in_occ) v /= double(merged.steps);
            for (double& v : merged.lif_rate) v /= double(merged.steps);
            merged.flatten_occ /= double(merged.steps);
        }
        *stats_out = merged;
    }
    return acc.report();
}

// Always-predict-grid-center reference.
inline MetricReport center_baseline(std::span<const Session> sessions) {
    MetricAccum acc;
    for (const Session& s : sessions)
        for (const LabelSample& l : s.labels.samples)
            acc.add(kGridWidth / 2.0, kGridHeight / 2.0, l);
    return acc.report();
}

// Sliding-window training with BPTT and streaming validation after each
// epoch; parameters at the best validation Euclidean distance are returned.
template <typename T>
inline TrainResult<T> train(std::span<const Session> train_sessions,
                            std::span<const Session> val_sessions, const TrainConfig& tc,
                            const ModelConfig& mc, const AugmentConfig& ac) {
    tc.validate();
    if (tc.augment) ac.validate(tc.window_ms);
    if (train_sessions.empty()) throw ConfigError("no training sessions");

    struct WindowId {
        int session;
        int start;
    };
    std::vector<WindowId> windows;
    for (size_t si = 0; si < train_sessions.size(); ++si) {
        for (int start :
             window_starts(train_sessions[si].duration_ms(), tc.window_ms, tc.stride_ms))
            windows.push_back({static_cast<int>(si), start});
    }
    if (windows.empty()) throw ConfigError("no training windows: sessions shorter than window");

    Network<T> net = Network<T>::build(mc);
    auto params = net.learnable_params();
    Adam<T> adam;
    adam.lr = tc.lr;
    adam.beta1 = tc.adam_beta1;
    adam.beta2 = tc.adam_beta2;
    adam.eps = tc.adam_eps;
    adam.init(params);

    GradVecs<T> grads;
    grads.init_like(net);
    Workspace<T> ws;
    SeqTrace<T> trace;
    std::vector<T> preds, gpred;

    TrainResult<T> result;
    result.net = net;
    bool warned_single_frame = false;
    std::uint64_t aug_counter = 0;

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        std::mt19937_64 order_rng(substream_seed(tc.seed, 1000 + epoch));
        std::shuffle(windows.begin(), windows.end(), order_rng);
        const int max_batches =
            tc.max_steps_per_epoch > 0
                ? std::min<int>(tc.max_steps_per_epoch,
                                int((windows.size() + tc.batch - 1) / tc.batch))
                : int((windows.size() + tc.batch - 1) / tc.batch);

        double ep_loss = 0, ep_pos = 0, ep_vel = 0;
        int ep_windows = 0;
        size_t wi = 0;
        for (int bstep = 0; bstep < max_batches; ++bstep) {
            grads.zero();
            int in_batch = 0;
            double b_pos = 0, b_vel = 0;
            for (int k = 0; k < tc.batch && wi < windows.size(); ++k, ++wi) {
                const WindowId id = windows[wi];
                const Session& sess = train_sessions[id.session];
                std::mt19937_64 rng(substream_seed(ac.rng_seed, aug_counter++));
                int start = id.start;
                if (tc.augment)
                    start = rolled_window_start(start, tc.window_ms, sess.duration_ms(),
                                                ac.max_temporal_shift, rng);
                Tensor4<T> window = materialize_window<T>(sess, start, tc.window_ms);
                std::vector<LabelSample> labels = window_labels(sess, start, tc.window_ms);
                if (tc.augment) augment_window(window, labels, ac, rng);

                NetState<T> st = net.initial_state();
                net.forward_sequence(st, window, preds, ws, &trace);
                const std::vector<T> norm_labels = normalize_labels_as<T>(labels);
                std::vector<std::uint8_t> mask;
                if (tc.exclude_blinks_from_loss) {
                    mask.resize(labels.size());
                    for (size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i].blink ? 0 : 1;
                }
                const LossTerms lt =
                    loss_and_grad(preds, norm_labels, tc.velocity_loss, &gpred,
                                  tc.exclude_blinks_from_loss ? &mask : nullptr);
                if (!lt.vel_defined && !warned_single_frame) {
                    std::cerr << "warning: single-frame window, velocity loss undefined\n";
                    warned_single_frame = true;
                }
                net.backward_sequence(window, trace, gpred, grads, ws);
                b_pos += lt.l_pos;
                b_vel += lt.l_vel;
                ++in_batch;
            }
            if (in_batch == 0) break;
            grads.scale(T(1) / T(in_batch));
            if (tc.grad_clip > 0) {
                const double norm = std::sqrt(grads.sq_norm());
                if (norm > tc.grad_clip) grads.scale(T(tc.grad_clip / norm));
            }
            if (adam.step(params, grads)) net.clamp_learnable_betas();
            ep_pos += b_pos;
            ep_vel += b_vel;
            ep_loss += b_pos + b_vel;
            ep_windows += in_batch;
        }

        EpochStats es;
        es.epoch = epoch;
        es.loss = ep_windows ? ep_loss / ep_windows : 0;
        es.l_pos = ep_windows ? ep_pos / ep_windows : 0;
        es.l_vel = ep_windows ? ep_vel / ep_windows : 0;
        if (!val_sessions.empty()) es.val = evaluate_streaming(net, val_sessions);
        result.history.push_back(es);
        if (tc.verbose) {
            std::cerr << "epoch " << epoch << " loss " << es.loss << " val_euc "
                      << es.val.euclidean << " val_p10 " << es.val.p_acc[10] << "\n";
        }

        const bool has_val = !val_sessions.empty() && es.val.frames_scored > 0;
        const double score = has_val ? es.val.euclidean : es.loss;
        if (result.best_epoch < 0 || score < result.best_val_euclidean) {
            result.best_epoch = epoch;
            result.best_val_euclidean = score;
            result.net = net;
        }
    }
    result.skipped_steps = adam.skipped;
    return result;
}

}  // namespace sgaze
