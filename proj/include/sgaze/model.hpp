#pragma once

#include <array>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sgaze/common.hpp"
#include "sgaze/layers.hpp"
#include "sgaze/lif.hpp"
#include "sgaze/tensor.hpp"

namespace sgaze {

struct ModelConfig {
    int n = 128;  // conv3 output channels, table variants use 128/256/512
    bool use_dsc = true;
    std::uint64_t seed = 1;
    double theta = 1.0;
    double surrogate_slope = 25.0;
    bool output_spiking = false;         // ablation: spiking readout instead of membrane
    bool membrane_uniform_init = false;  // U(0,1) membrane init instead of zeros

    void validate() const {
        if (n <= 0) throw ConfigError("model n must be positive");
        if (theta <= 0) throw ConfigError("theta must be positive");
    }
};

template <typename T>
struct NetState {
    LIFState<T> l1, l2, l3;
    NetState() : l1(256), l2(64), l3(2) {}
    void zero() {
        l1.zero();
        l2.zero();
        l3.zero();
    }
};

template <typename T>
struct ParamRef {
    std::string name;
    std::vector<T>* data;
    std::vector<int> shape;
};

template <typename T>
struct GradVecs {
    std::vector<std::vector<T>> g;

    template <typename Net>
    void init_like(Net& net) {
        auto refs = net.learnable_params();
        g.resize(refs.size());
        for (size_t i = 0; i < refs.size(); ++i) g[i].assign(refs[i].data->size(), T(0));
    }
    void zero() {
        for (auto& v : g) std::fill(v.begin(), v.end(), T(0));
    }
    void scale(T f) {
        for (auto& v : g)
            for (T& x : v) x *= f;
    }
    bool all_finite() const {
        for (const auto& v : g)
            for (T x : v)
                if (!is_finite(x)) return false;
        return true;
    }
    double sq_norm() const {
        double s = 0;
        for (const auto& v : g)
            for (T x : v) s += double(x) * double(x);
        return s;
    }
};

// Intermediate tensors of one conv block; reused across steps.
// Chain (separable): x -> dw -> a -> in+relu -> c -> pw -> d -> in+relu -> f -> pool -> g
// Chain (standard):  x -> conv -> a -> in+relu -> c -> pool -> g
template <typename T>
struct BlockWs {
    Tensor4<T> a, c, d, f, g;       // forward chain
    Tensor4<T> ga, gc, gd, gf;      // backward scratch
    Tensor4<T> gx;                  // gradient w.r.t. the block input
};

template <typename T>
struct Workspace {
    Tensor4<T> x0{1, 2, kGridHeight, kGridWidth};
    std::array<BlockWs<T>, 3> blk;
    std::vector<T> flat, s1, s2, out;
    std::vector<T> gs1, gs2, gu1, gu2, gu3, gbeta_scratch;
    Tensor4<T> g_top;

    Workspace() : s1(256), s2(64), out(2) {}
};

// Per-step activity snapshot used by the stream probes and the cost model.
struct StepProbe {
    std::array<double, 6> conv_in_occ{};  // dsc: dw1,pw1,dw2,pw2,dw3,pw3; std: conv1..3 in [0..2]
    double flatten_occ = 0;
    std::array<double, 3> lif_rate{};
};

// BPTT trace of one window.
template <typename T>
struct SeqTrace {
    int steps = 0;
    int flat_dim = 0;
    std::vector<T> flat;  // steps * flat_dim
    LIFTrace<T> l1, l2, l3;

    void reset(int steps_, int flat_dim_) {
        steps = steps_;
        flat_dim = flat_dim_;
        flat.assign(size_t(steps_) * flat_dim_, T(0));
        l1.reset(steps_, 256);
        l2.reset(steps_, 64);
        l3.reset(steps_, 2);
    }
};

namespace detail {
template <typename T>
inline double occupancy_ptr(const T* x, size_t n) {
    if (n == 0) return 0.0;
    int nz[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) nz[l] += (x[i + l] != T(0));
    int tail = 0;
    for (; i < n; ++i) tail += (x[i] != T(0));
    const long total =
        long(nz[0]) + nz[1] + nz[2] + nz[3] + nz[4] + nz[5] + nz[6] + nz[7] + tail;
    return double(total) / double(n);
}
template <typename T>
inline double occupancy(const Tensor4<T>& t) {
    return occupancy_ptr(t.data.data(), t.size());
}
template <typename T>
inline double occupancy(const std::vector<T>& v) {
    return occupancy_ptr(v.data(), v.size());
}
template <typename T>
inline double mean(const std::vector<T>& v) {
    double s = 0;
    for (const T& x : v) s += double(x);
    return v.empty() ? 0.0 : s / double(v.size());
}
}  // namespace detail

// The full tracking network: three conv blocks for spatial features, then a
// three-layer LIF stack whose final membrane potentials are the normalized
// (x, y) prediction.
template <typename T>
struct Network {
    ModelConfig cfg;
    // separable path
    DepthwiseConv<T> dw1, dw2, dw3;
    PointwiseConv<T> pw1, pw2, pw3;
    // standard-conv path (ablation)
    Conv2D<T> conv1, conv2, conv3;
    InstanceNorm<T> inorm;
    std::array<int, 3> pool{3, 3, 4};
    LIFDense<T> lif1, lif2, lif3;
    int flat_dim = 0;

    static Network build(const ModelConfig& cfg) {
        cfg.validate();
        Network net;
        net.cfg = cfg;
        const int n = cfg.n;
        std::mt19937_64 rng(cfg.seed);
        auto he_uniform = [&rng](std::vector<T>& w, int fan_in) {
            const double limit = std::sqrt(6.0 / double(fan_in));
            std::uniform_real_distribution<double> d(-limit, limit);
            for (T& v : w) v = static_cast<T>(d(rng));
        };
        if (cfg.use_dsc) {
            net.dw1 = DepthwiseConv<T>(2, 7);
            net.pw1 = PointwiseConv<T>(2, 32);
            net.dw2 = DepthwiseConv<T>(32, 5);
            net.pw2 = PointwiseConv<T>(32, 128);
            net.dw3 = DepthwiseConv<T>(128, 5);
            net.pw3 = PointwiseConv<T>(128, n);
            he_uniform(net.dw1.w, 7 * 7);
            he_uniform(net.pw1.w, 2);
            he_uniform(net.dw2.w, 5 * 5);
            he_uniform(net.pw2.w, 32);
            he_uniform(net.dw3.w, 5 * 5);
            he_uniform(net.pw3.w, 128);
        } else {
            net.conv1 = Conv2D<T>(2, 32, 7);
            net.conv2 = Conv2D<T>(32, 128, 5);
            net.conv3 = Conv2D<T>(128, n, 5);
            he_uniform(net.conv1.w, 2 * 7 * 7);
            he_uniform(net.conv2.w, 32 * 5 * 5);
            he_uniform(net.conv3.w, 128 * 5 * 5);
        }
        net.flat_dim = 2 * n;
        net.lif1 = LIFDense<T>(net.flat_dim, 256);
        net.lif2 = LIFDense<T>(256, 64);
        net.lif3 = LIFDense<T>(64, 2);
        he_uniform(net.lif1.w, net.flat_dim);
        he_uniform(net.lif2.w, 256);
        he_uniform(net.lif3.w, 64);
        // Hidden decays fixed, drawn once per model from U(0.9, 1); the
        // readout decay is learnable and starts at 0.9.
        std::uniform_real_distribution<double> bd(0.9, 1.0);
        for (T& v : net.lif1.beta) v = static_cast<T>(bd(rng));
        for (T& v : net.lif2.beta) v = static_cast<T>(bd(rng));
        std::fill(net.lif3.beta.begin(), net.lif3.beta.end(), T(0.9));
        net.lif3.beta_learnable = true;
        net.lif3.spiking = cfg.output_spiking;
        for (LIFDense<T>* l : {&net.lif1, &net.lif2, &net.lif3}) {
            l->theta = static_cast<T>(cfg.theta);
            l->surrogate_slope = static_cast<T>(cfg.surrogate_slope);
        }
        return net;
    }

    int n_spiking_stages() const { return 3; }

    NetState<T> initial_state() const {
        NetState<T> st;
        if (cfg.membrane_uniform_init) {
            std::mt19937_64 rng(substream_seed(cfg.seed, 0xabcdefULL));
            std::uniform_real_distribution<double> d(0.0, 1.0);
            for (T& u : st.l1.u) u = static_cast<T>(d(rng));
            for (T& u : st.l2.u) u = static_cast<T>(d(rng));
            for (T& u : st.l3.u) u = static_cast<T>(d(rng));
        }
        return st;
    }

    std::vector<ParamRef<T>> learnable_params() {
        std::vector<ParamRef<T>> p;
        if (cfg.use_dsc) {
            p.push_back({"dw1.w", &dw1.w, {2, 7, 7}});
            p.push_back({"pw1.w", &pw1.w, {2, 32}});
            p.push_back({"dw2.w", &dw2.w, {32, 5, 5}});
            p.push_back({"pw2.w", &pw2.w, {32, 128}});
            p.push_back({"dw3.w", &dw3.w, {128, 5, 5}});
            p.push_back({"pw3.w", &pw3.w, {128, cfg.n}});
        } else {
            p.push_back({"conv1.w", &conv1.w, {32, 2, 7, 7}});
            p.push_back({"conv2.w", &conv2.w, {128, 32, 5, 5}});
            p.push_back({"conv3.w", &conv3.w, {cfg.n, 128, 5, 5}});
        }
        p.push_back({"lif1.w", &lif1.w, {flat_dim, 256}});
        p.push_back({"lif1.b", &lif1.b, {256}});
        p.push_back({"lif2.w", &lif2.w, {256, 64}});
        p.push_back({"lif2.b", &lif2.b, {64}});
        p.push_back({"lif3.w", &lif3.w, {64, 2}});
        p.push_back({"lif3.b", &lif3.b, {2}});
        p.push_back({"lif3.beta", &lif3.beta, {2}});
        return p;
    }

    std::vector<ParamRef<T>> all_tensors() {
        auto p = learnable_params();
        p.push_back({"lif1.beta", &lif1.beta, {256}});
        p.push_back({"lif2.beta", &lif2.beta, {64}});
        return p;
    }

    // Learnable-parameter count; fixed decays are excluded like in the
    // architecture table.
    size_t count_params() {
        size_t total = 0;
        for (const auto& ref : learnable_params()) total += ref.data->size();
        return total;
    }

    void clamp_learnable_betas() {
        for (T& v : lif3.beta) v = std::min(std::max(v, T(1e-6)), T(1));
    }

    // --- forward ---

    // Runs the three conv blocks on ws.x0, leaving the pooled feature map in
    // ws.blk[2].g and its flattened copy in ws.flat.
    void trunk_forward(Workspace<T>& ws, StepProbe* probe = nullptr) const {
        const Tensor4<T>* x = &ws.x0;
        for (int i = 0; i < 3; ++i) {
            BlockWs<T>& B = ws.blk[i];
            if (cfg.use_dsc) {
                const DepthwiseConv<T>& dw = i == 0 ? dw1 : (i == 1 ? dw2 : dw3);
                const PointwiseConv<T>& pw = i == 0 ? pw1 : (i == 1 ? pw2 : pw3);
                if (probe) probe->conv_in_occ[i * 2] = detail::occupancy(*x);
                dw.forward(*x, B.a);
                inorm.forward_relu(B.a, B.c);
                if (probe) probe->conv_in_occ[i * 2 + 1] = detail::occupancy(B.c);
                pw.forward(B.c, B.d);
                inorm.forward_relu(B.d, B.f);
                avg_pool_forward(B.f, pool[i], B.g);
            } else {
                const Conv2D<T>& cv = i == 0 ? conv1 : (i == 1 ? conv2 : conv3);
                if (probe) probe->conv_in_occ[i] = detail::occupancy(*x);
                cv.forward(*x, B.a);
                inorm.forward_relu(B.a, B.f);
                avg_pool_forward(B.f, pool[i], B.g);
            }
            x = &B.g;
        }
        const Tensor4<T>& top = ws.blk[2].g;
        ws.flat.assign(top.data.begin(), top.data.end());
        if (probe) probe->flatten_occ = detail::occupancy(ws.flat);
    }

    // One 1 ms step. Returns the normalized (x, y) prediction.
    std::array<T, 2> forward_step(NetState<T>& st, Workspace<T>& ws, StepProbe* probe = nullptr,
                                  SeqTrace<T>* trace = nullptr, int t = 0) const {
        trunk_forward(ws, probe);
        lif1.step(st.l1, ws.flat.data(), ws.s1.data(), trace ? &trace->l1 : nullptr, t);
        lif2.step(st.l2, ws.s1.data(), ws.s2.data(), trace ? &trace->l2 : nullptr, t);
        lif3.step(st.l3, ws.s2.data(), ws.out.data(), trace ? &trace->l3 : nullptr, t);
        if (trace)
            std::copy(ws.flat.begin(), ws.flat.end(), trace->flat.begin() + size_t(t) * flat_dim);
        if (probe) {
            probe->lif_rate[0] = detail::mean(st.l1.s_prev);
            probe->lif_rate[1] = detail::mean(st.l2.s_prev);
            probe->lif_rate[2] = detail::mean(st.l3.s_prev);
        }
#ifndef NDEBUG
        for (T v : ws.out)
            if (!is_finite(v)) throw std::runtime_error("non-finite prediction");
#endif
        return {ws.out[0], ws.out[1]};
    }

    std::array<T, 2> forward_step(NetState<T>& st, const Tensor4<T>& frame, Workspace<T>& ws,
                                  StepProbe* probe = nullptr, SeqTrace<T>* trace = nullptr,
                                  int t = 0) const {
        if (frame.c != 2 || frame.h != kGridHeight || frame.w != kGridWidth || frame.n != 1)
            throw ShapeError("forward_step expects a (1,2,60,80) frame");
        ws.x0.data.assign(frame.data.begin(), frame.data.end());
        return forward_step(st, ws, probe, trace, t);
    }

    // Unrolls forward_step over a (T,2,60,80) window. Predictions are the
    // normalized readout per step, laid out (steps, 2).
    void forward_sequence(NetState<T>& st, const Tensor4<T>& window, std::vector<T>& preds,
                          Workspace<T>& ws, SeqTrace<T>* trace = nullptr) const {
        const int steps = window.n;
        preds.assign(size_t(steps) * 2, T(0));
        if (trace) {
            trace->reset(steps, flat_dim);
            std::copy(st.l1.u.begin(), st.l1.u.end(), trace->l1.u0.begin());
            std::copy(st.l2.u.begin(), st.l2.u.end(), trace->l2.u0.begin());
            std::copy(st.l3.u.begin(), st.l3.u.end(), trace->l3.u0.begin());
        }
        const size_t plane = size_t(2) * kGridHeight * kGridWidth;
        for (int t = 0; t < steps; ++t) {
            std::memcpy(ws.x0.data.data(), window.data.data() + size_t(t) * plane,
                        plane * sizeof(T));
            const auto p = forward_step(st, ws, nullptr, trace, t);
            preds[size_t(t) * 2] = p[0];
            preds[size_t(t) * 2 + 1] = p[1];
        }
    }

    // --- backward (BPTT) ---

    // Accumulates gradients for one window into `grads` (layout of
    // learnable_params()). The conv trunk is recomputed per step from the
    // stored window instead of keeping per-step activation traces.
    void backward_sequence(const Tensor4<T>& window, const SeqTrace<T>& trace,
                           const std::vector<T>& gpred, GradVecs<T>& grads,
                           Workspace<T>& ws) const {
        const int steps = trace.steps;
        const int nconv = cfg.use_dsc ? 6 : 3;
        std::vector<T>& gw1 = grads.g[nconv + 0];
        std::vector<T>& gb1 = grads.g[nconv + 1];
        std::vector<T>& gw2 = grads.g[nconv + 2];
        std::vector<T>& gb2 = grads.g[nconv + 3];
        std::vector<T>& gw3 = grads.g[nconv + 4];
        std::vector<T>& gb3 = grads.g[nconv + 5];
        std::vector<T>& gbeta3 = grads.g[nconv + 6];

        ws.gu1.assign(256, T(0));
        ws.gu2.assign(64, T(0));
        ws.gu3.assign(2, T(0));
        ws.gs1.assign(256, T(0));
        ws.gs2.assign(64, T(0));
        if (ws.gbeta_scratch.size() < 256) ws.gbeta_scratch.assign(256, T(0));
        std::vector<T> gflat(size_t(steps) * flat_dim, T(0));

        for (int t = steps - 1; t >= 0; --t) {
            lif3.step_backward(trace.l3, t, trace.l2.s.data() + size_t(t) * 64,
                               gpred.data() + size_t(t) * 2, ws.gu3, ws.gs2.data(), gw3, gb3,
                               gbeta3);
            lif2.step_backward(trace.l2, t, trace.l1.s.data() + size_t(t) * 256, ws.gs2.data(),
                               ws.gu2, ws.gs1.data(), gw2, gb2, ws.gbeta_scratch);
            lif1.step_backward(trace.l1, t, trace.flat.data() + size_t(t) * flat_dim,
                               ws.gs1.data(), ws.gu1, gflat.data() + size_t(t) * flat_dim, gw1,
                               gb1, ws.gbeta_scratch);
        }

        const size_t plane = size_t(2) * kGridHeight * kGridWidth;
        for (int t = 0; t < steps; ++t) {
            std::memcpy(ws.x0.data.data(), window.data.data() + size_t(t) * plane,
                        plane * sizeof(T));
            trunk_forward(ws);
            const Tensor4<T>& top = ws.blk[2].g;
            ensure_shape(ws.g_top, top.n, top.c, top.h, top.w);
            std::copy(gflat.begin() + size_t(t) * flat_dim,
                      gflat.begin() + size_t(t + 1) * flat_dim, ws.g_top.data.begin());
            trunk_backward(ws, grads);
        }
    }

    // Backprop through the conv trunk for the step whose activations are in
    // ws (gradient w.r.t. the input frame is not needed and not produced).
    void trunk_backward(Workspace<T>& ws, GradVecs<T>& grads) const {
        const Tensor4<T>* gtop = &ws.g_top;
        for (int i = 2; i >= 0; --i) {
            BlockWs<T>& B = ws.blk[i];
            const Tensor4<T>* below = i == 0 ? &ws.x0 : &ws.blk[i - 1].g;
            if (cfg.use_dsc) {
                const DepthwiseConv<T>& dw = i == 0 ? dw1 : (i == 1 ? dw2 : dw3);
                const PointwiseConv<T>& pw = i == 0 ? pw1 : (i == 1 ? pw2 : pw3);
                avg_pool_backward(B.f, pool[i], *gtop, B.gf);
                relu_backward_from_output(B.f, B.gf, B.gf);
                inorm.backward(B.d, B.gf, B.gd);
                pw.backward(B.c, B.gd, B.gc, grads.g[i * 2 + 1]);
                relu_backward_from_output(B.c, B.gc, B.gc);
                inorm.backward(B.a, B.gc, B.ga);
                if (i > 0) {
                    dw.backward(*below, B.ga, B.gx, grads.g[i * 2]);
                    gtop = &B.gx;
                } else {
                    dw.weight_grad(*below, B.ga, grads.g[0]);
                }
            } else {
                const Conv2D<T>& cv = i == 0 ? conv1 : (i == 1 ? conv2 : conv3);
                avg_pool_backward(B.f, pool[i], *gtop, B.gf);
                relu_backward_from_output(B.f, B.gf, B.gf);
                inorm.backward(B.a, B.gf, B.ga);
                if (i > 0) {
                    cv.backward(*below, B.ga, B.gx, grads.g[i]);
                    gtop = &B.gx;
                } else {
                    cv.weight_grad(*below, B.ga, grads.g[0]);
                }
            }
        }
    }
};

// Prediction scaled to the 80x60 working space.
template <typename T>
inline std::array<T, 2> to_pixels(const std::array<T, 2>& norm) {
    return {norm[0] * T(kGridWidth), norm[1] * T(kGridHeight)};
}

}  // namespace sgaze
