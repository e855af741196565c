#pragma once

#include <cmath>
#include <vector>

#include "sgaze/common.hpp"

namespace sgaze {

// Membrane state of one LIF layer. s_prev keeps the last emitted spikes for
// instrumentation; the dynamics only need u.
template <typename T>
struct LIFState {
    std::vector<T> u;
    std::vector<T> s_prev;

    LIFState() = default;
    explicit LIFState(int width) : u(width, T(0)), s_prev(width, T(0)) {}
    void zero() {
        std::fill(u.begin(), u.end(), T(0));
        std::fill(s_prev.begin(), s_prev.end(), T(0));
    }
};

// Per-step quantities recorded during a forward pass for BPTT.
template <typename T>
struct LIFTrace {
    int steps = 0;
    int width = 0;
    std::vector<T> u_pre;  // steps*width, membrane before reset
    std::vector<T> s;      // steps*width, emitted spikes (all zero for readout)
    std::vector<T> u0;     // width, state before the first step

    void reset(int steps_, int width_) {
        steps = steps_;
        width = width_;
        u_pre.assign(size_t(steps_) * width_, T(0));
        s.assign(size_t(steps_) * width_, T(0));
        u0.assign(width_, T(0));
    }
};

// Dense leaky integrate-and-fire layer:
//   I_t = W x_t + b,  U~_t = beta (.) U_{t-1} + I_t
//   spiking:  S_t = [U~_t > theta],  U_t = U~_t - theta S_t   (subtractive reset)
//   readout:  S_t = 0,               U_t = U~_t  and the membrane is the output
// Weights are stored input-major (in, out) so integration walks columns and
// can skip silent inputs.
template <typename T>
struct LIFDense {
    int in = 0, out = 0;
    std::vector<T> w;     // in * out, w[i*out + o]
    std::vector<T> b;     // out
    std::vector<T> beta;  // out, decay in (0, 1]
    T theta = T(1);
    T surrogate_slope = T(25);
    bool spiking = true;
    bool beta_learnable = false;

    LIFDense() = default;
    LIFDense(int in_, int out_)
        : in(in_), out(out_), w(size_t(in_) * out_, T(0)), b(out_, T(0)), beta(out_, T(1)) {}

    // Learnable beta counts as parameters; fixed decays do not.
    size_t param_count() const {
        return w.size() + b.size() + (beta_learnable ? beta.size() : 0);
    }

    // One timestep. Writes the layer output (spikes, or membrane for the
    // readout) to `output`; `trace`, when given, records BPTT quantities at
    // step `t`.
    void step(LIFState<T>& st, const T* x, T* output, LIFTrace<T>* trace = nullptr,
              int t = 0) const {
        // U~ = beta (.) U + b, then integrate W x column-wise skipping x_i == 0
        // (exactly zero contributions, so the skip does not change results).
        for (int o = 0; o < out; ++o) st.u[o] = beta[o] * st.u[o] + b[o];
        T* u = st.u.data();
        for (int i = 0; i < in; ++i) {
            const T xi = x[i];
            if (xi == T(0)) continue;
            const T* col = w.data() + size_t(i) * out;
            for (int o = 0; o < out; ++o) u[o] += xi * col[o];
        }
        if (trace) {
            std::copy(st.u.begin(), st.u.end(), trace->u_pre.begin() + size_t(t) * out);
        }
        if (spiking) {
            for (int o = 0; o < out; ++o) {
                const T s = st.u[o] > theta ? T(1) : T(0);
                st.u[o] -= theta * s;
                st.s_prev[o] = s;
                output[o] = s;
            }
        } else {
            for (int o = 0; o < out; ++o) {
                st.s_prev[o] = T(0);
                output[o] = st.u[o];
            }
        }
        if (trace) {
            // the recorded output doubles as the next layer's input in BPTT
            std::copy(output, output + out, trace->s.begin() + size_t(t) * out);
        }
    }

    // Fast-sigmoid surrogate for the spike derivative.
    T surrogate(T u_pre) const {
        const T d = T(1) + surrogate_slope * std::abs(u_pre - theta);
        return T(1) / (d * d);
    }

    // Reverse-time adjoint of one step. `g_out` is dL/d(layer output) at
    // step t, `g_u` carries dL/dU_t in and dL/dU_{t-1} out. `x` is the step
    // input; gx (may be null) receives dL/dx_t. gw/gb/gbeta accumulate.
    // The subtractive reset is detached: gradients flow through the linear
    // recurrence exactly, and the surrogate applies only where spikes leave
    // the layer. Sub-threshold, this backward is exact.
    void step_backward(const LIFTrace<T>& trace, int t, const T* x, const T* g_out,
                       std::vector<T>& g_u, T* gx, std::vector<T>& gw, std::vector<T>& gb,
                       std::vector<T>& gbeta) const {
        const T* u_pre = trace.u_pre.data() + size_t(t) * out;
        const T* u_prev_pre = t > 0 ? trace.u_pre.data() + size_t(t - 1) * out : nullptr;
        const T* s_prev = t > 0 ? trace.s.data() + size_t(t - 1) * out : nullptr;

        // dL/dU~_t into g_u (reused as the gU~ buffer below)
        for (int o = 0; o < out; ++o) {
            T g;
            if (spiking) {
                g = g_out[o] * surrogate(u_pre[o]) + g_u[o];
            } else {
                g = g_out[o] + g_u[o];
            }
            // U_{t-1} after reset, reconstructed from the trace
            T u_prev;
            if (t == 0)
                u_prev = trace.u0[o];
            else if (spiking)
                u_prev = u_prev_pre[o] - theta * s_prev[o];
            else
                u_prev = u_prev_pre[o];
            gb[o] += g;
            gbeta[o] += g * u_prev;
            g_u[o] = g;  // now holds gU~_t
        }
        // Weight/input gradients from gU~_t
        for (int i = 0; i < in; ++i) {
            const T xi = x[i];
            const T* col = w.data() + size_t(i) * out;
            T* gcol = gw.data() + size_t(i) * out;
            T acc = T(0);
            for (int o = 0; o < out; ++o) {
                acc += col[o] * g_u[o];
                gcol[o] += xi * g_u[o];
            }
            if (gx) gx[i] = acc;
        }
        // Carry dL/dU_{t-1} = beta (.) gU~_t
        for (int o = 0; o < out; ++o) g_u[o] *= beta[o];
    }
};

}  // namespace sgaze
