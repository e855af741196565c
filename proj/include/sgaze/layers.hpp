#pragma once

#include <cmath>
#include <cstring>
#include <vector>

#include "sgaze/common.hpp"
#include "sgaze/tensor.hpp"

namespace sgaze {

template <typename T>
inline void ensure_shape(Tensor4<T>& t, int n, int c, int h, int w) {
    if (t.n != n || t.c != c || t.h != h || t.w != w) t = Tensor4<T>(n, c, h, w);
}

namespace detail {

// Fixed 8-lane partial sums: breaks the latency chain so the loop pipelines
// and vectorizes, with a deterministic summation order.
template <typename T>
inline T lane_sum(const T* x, size_t n) {
    T s[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) s[l] += x[i + l];
    for (; i < n; ++i) s[i - (n - (n % 8))] += x[i];
    return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
}

template <typename T>
inline T lane_dot(const T* a, const T* b, size_t n) {
    T s[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) s[l] += a[i + l] * b[i + l];
    for (; i < n; ++i) s[i - (n - (n % 8))] += a[i] * b[i];
    return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
}

// sum of (x - mu)^2 with the same lane structure
template <typename T>
inline T lane_centered_sq(const T* x, size_t n, T mu) {
    T s[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) {
            const T d = x[i + l] - mu;
            s[l] += d * d;
        }
    for (; i < n; ++i) {
        const T d = x[i] - mu;
        s[i - (n - (n % 8))] += d * d;
    }
    return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
}

// one-pass mean/variance with double accumulators (cancellation-safe for
// activation magnitudes)
template <typename T>
inline void lane_mean_var(const T* x, size_t n, double& mean, double& var) {
    double s[8] = {}, q[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) {
            const double v = double(x[i + l]);
            s[l] += v;
            q[l] += v * v;
        }
    for (; i < n; ++i) {
        const double v = double(x[i]);
        s[i - (n - (n % 8))] += v;
        q[i - (n - (n % 8))] += v * v;
    }
    const double sum = ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
    const double sq = ((q[0] + q[1]) + (q[2] + q[3])) + ((q[4] + q[5]) + (q[6] + q[7]));
    mean = sum / double(n);
    var = std::max(0.0, sq / double(n) - mean * mean);
}

template <typename T>
inline size_t count_nonzero(const T* x, size_t n) {
    size_t c = 0;
    for (size_t i = 0; i < n; ++i) c += (x[i] != T(0));
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Depthwise convolution, odd k, same zero padding, stride 1, no bias.
// Weights laid out (c, k, k). Dense tap-outer loops; near-empty inputs
// (event frames) take a scatter path over the nonzero pixels instead.
// ---------------------------------------------------------------------------
template <typename T>
struct DepthwiseConv {
    int channels = 0;
    int k = 0;
    std::vector<T> w;  // channels * k * k

    DepthwiseConv() = default;
    DepthwiseConv(int channels_, int k_) : channels(channels_), k(k_), w(size_t(channels_) * k_ * k_, T(0)) {}

    size_t param_count() const { return w.size(); }

    void forward(const Tensor4<T>& x, Tensor4<T>& y) const {
        if (x.c != channels) throw ShapeError("depthwise conv: channel mismatch");
        ensure_shape(y, x.n, x.c, x.h, x.w);
        y.zero();
        const int p = k / 2;
        const size_t plane = size_t(x.h) * x.w;
        for (int in = 0; in < x.n; ++in)
            for (int c = 0; c < channels; ++c) {
                const T* src = x.channel(in, c);
                T* dst = y.channel(in, c);
                const T* kw = w.data() + size_t(c) * k * k;
                // scatter wins when the plane is mostly empty
                if (detail::count_nonzero(src, plane) * size_t(k) * k < plane / 2) {
                    for (int iy = 0; iy < x.h; ++iy) {
                        const T* row = src + size_t(iy) * x.w;
                        for (int ix = 0; ix < x.w; ++ix) {
                            const T v = row[ix];
                            if (v == T(0)) continue;
                            for (int ky = 0; ky < k; ++ky) {
                                const int oy = iy + p - ky;
                                if (oy < 0 || oy >= x.h) continue;
                                T* orow = dst + size_t(oy) * x.w;
                                for (int kx = 0; kx < k; ++kx) {
                                    const int ox = ix + p - kx;
                                    if (ox < 0 || ox >= x.w) continue;
                                    orow[ox] += kw[ky * k + kx] * v;
                                }
                            }
                        }
                    }
                    continue;
                }
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx) {
                        const T wv = kw[ky * k + kx];
                        const int dy = ky - p, dx = kx - p;
                        const int y0 = std::max(0, -dy), y1 = x.h - std::max(0, dy);
                        const int x0 = std::max(0, -dx), x1 = x.w - std::max(0, dx);
                        for (int yy = y0; yy < y1; ++yy) {
                            T* d = dst + size_t(yy) * x.w;
                            const T* s = src + size_t(yy + dy) * x.w + dx;
                            for (int xx = x0; xx < x1; ++xx) d[xx] += wv * s[xx];
                        }
                    }
            }
    }

    // gx is overwritten, gw accumulated (BPTT sums over steps).
    void backward(const Tensor4<T>& x, const Tensor4<T>& gy, Tensor4<T>& gx, std::vector<T>& gw) const {
        ensure_shape(gx, x.n, x.c, x.h, x.w);
        gx.zero();
        weight_grad(x, gy, gw);
        const int p = k / 2;
        for (int in = 0; in < x.n; ++in)
            for (int c = 0; c < channels; ++c) {
                const T* g = gy.channel(in, c);
                T* gxc = gx.channel(in, c);
                const T* kw = w.data() + size_t(c) * k * k;
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx) {
                        const T wv = kw[ky * k + kx];
                        const int dy = ky - p, dx = kx - p;
                        const int y0 = std::max(0, -dy), y1 = x.h - std::max(0, dy);
                        const int x0 = std::max(0, -dx), x1 = x.w - std::max(0, dx);
                        for (int yy = y0; yy < y1; ++yy) {
                            const T* gr = g + size_t(yy) * x.w;
                            T* gxr = gxc + size_t(yy + dy) * x.w + dx;
                            for (int xx = x0; xx < x1; ++xx) gxr[xx] += wv * gr[xx];
                        }
                    }
            }
    }

    void weight_grad(const Tensor4<T>& x, const Tensor4<T>& gy, std::vector<T>& gw) const {
        const int p = k / 2;
        for (int in = 0; in < x.n; ++in)
            for (int c = 0; c < channels; ++c) {
                const T* src = x.channel(in, c);
                const T* g = gy.channel(in, c);
                T* gwc = gw.data() + size_t(c) * k * k;
                for (int ky = 0; ky < k; ++ky)
                    for (int kx = 0; kx < k; ++kx) {
                        const int dy = ky - p, dx = kx - p;
                        const int y0 = std::max(0, -dy), y1 = x.h - std::max(0, dy);
                        const int x0 = std::max(0, -dx), x1 = x.w - std::max(0, dx);
                        T acc = T(0);
                        for (int yy = y0; yy < y1; ++yy)
                            acc += detail::lane_dot(g + size_t(yy) * x.w + x0,
                                                    src + size_t(yy + dy) * x.w + dx + x0,
                                                    size_t(x1 - x0));
                        gwc[ky * k + kx] += acc;
                    }
            }
    }
};

// ---------------------------------------------------------------------------
// Pointwise (1x1) convolution, no bias. Weights laid out (c_in, c_out).
// Forward/backward run a register-tiled kernel (4 output channels x 16
// pixels) so the accumulators live in vector registers; per output element
// the reduction over c_in stays in ascending order.
// ---------------------------------------------------------------------------
template <typename T>
struct PointwiseConv {
    static constexpr int kCoTile = 4;
    static constexpr size_t kPxTile = 16;

    int c_in = 0, c_out = 0;
    std::vector<T> w;  // c_in * c_out, w[ci*c_out + co]

    PointwiseConv() = default;
    PointwiseConv(int c_in_, int c_out_) : c_in(c_in_), c_out(c_out_), w(size_t(c_in_) * c_out_, T(0)) {}

    size_t param_count() const { return w.size(); }

    // 4 output channels x 16 pixels with register accumulators.
    static void tile4x16(const T* xbase, const T* wcol, size_t plane, size_t p0, int c_in,
                         int c_out, T* out0, T* out1, T* out2, T* out3) {
        T a0[kPxTile] = {}, a1[kPxTile] = {}, a2[kPxTile] = {}, a3[kPxTile] = {};
        for (int ci = 0; ci < c_in; ++ci) {
            const T* xr = xbase + size_t(ci) * plane + p0;
            const T* wr = wcol + size_t(ci) * c_out;
            const T w0 = wr[0], w1 = wr[1], w2 = wr[2], w3 = wr[3];
            for (size_t q = 0; q < kPxTile; ++q) {
                const T v = xr[q];
                a0[q] += w0 * v;
                a1[q] += w1 * v;
                a2[q] += w2 * v;
                a3[q] += w3 * v;
            }
        }
        for (size_t q = 0; q < kPxTile; ++q) out0[q] = a0[q];
        for (size_t q = 0; q < kPxTile; ++q) out1[q] = a1[q];
        for (size_t q = 0; q < kPxTile; ++q) out2[q] = a2[q];
        for (size_t q = 0; q < kPxTile; ++q) out3[q] = a3[q];
    }

    void forward(const Tensor4<T>& x, Tensor4<T>& y) const {
        if (x.c != c_in) throw ShapeError("pointwise conv: channel mismatch");
        ensure_shape(y, x.n, c_out, x.h, x.w);
        const size_t plane = size_t(x.h) * x.w;
        const size_t main_pl = plane - plane % kPxTile;
        for (int in = 0; in < x.n; ++in) {
            const T* xbase = x.channel(in, 0);
            T* ybase = y.channel(in, 0);
            for (size_t p0 = 0; p0 < main_pl; p0 += kPxTile) {
                int co0 = 0;
                for (; co0 + kCoTile <= c_out; co0 += kCoTile)
                    tile4x16(xbase, w.data() + co0, plane, p0, c_in, c_out,
                             ybase + size_t(co0) * plane + p0, ybase + size_t(co0 + 1) * plane + p0,
                             ybase + size_t(co0 + 2) * plane + p0,
                             ybase + size_t(co0 + 3) * plane + p0);
                for (; co0 < c_out; ++co0) {
                    T acc[kPxTile] = {};
                    for (int ci = 0; ci < c_in; ++ci) {
                        const T wv = w[size_t(ci) * c_out + co0];
                        const T* xr = xbase + size_t(ci) * plane + p0;
                        for (size_t q = 0; q < kPxTile; ++q) acc[q] += wv * xr[q];
                    }
                    T* dst = ybase + size_t(co0) * plane + p0;
                    for (size_t q = 0; q < kPxTile; ++q) dst[q] = acc[q];
                }
            }
            for (size_t p = main_pl; p < plane; ++p)
                for (int co = 0; co < c_out; ++co) {
                    T acc = T(0);
                    for (int ci = 0; ci < c_in; ++ci)
                        acc += w[size_t(ci) * c_out + co] * xbase[size_t(ci) * plane + p];
                    ybase[size_t(co) * plane + p] = acc;
                }
        }
    }

    // gx = W g: same tile kernel with the roles of the channel dims swapped.
    static void tile4x16_t(const T* gbase, const T* wrow, size_t plane, size_t p0, int c_out,
                           int c_in, T* out0, T* out1, T* out2, T* out3) {
        T a0[kPxTile] = {}, a1[kPxTile] = {}, a2[kPxTile] = {}, a3[kPxTile] = {};
        for (int co = 0; co < c_out; ++co) {
            const T* gr = gbase + size_t(co) * plane + p0;
            const T w0 = wrow[0 * size_t(c_out) + co];
            const T w1 = wrow[1 * size_t(c_out) + co];
            const T w2 = wrow[2 * size_t(c_out) + co];
            const T w3 = wrow[3 * size_t(c_out) + co];
            for (size_t q = 0; q < kPxTile; ++q) {
                const T v = gr[q];
                a0[q] += w0 * v;
                a1[q] += w1 * v;
                a2[q] += w2 * v;
                a3[q] += w3 * v;
            }
        }
        (void)c_in;
        for (size_t q = 0; q < kPxTile; ++q) out0[q] = a0[q];
        for (size_t q = 0; q < kPxTile; ++q) out1[q] = a1[q];
        for (size_t q = 0; q < kPxTile; ++q) out2[q] = a2[q];
        for (size_t q = 0; q < kPxTile; ++q) out3[q] = a3[q];
    }

    void backward(const Tensor4<T>& x, const Tensor4<T>& gy, Tensor4<T>& gx, std::vector<T>& gw) const {
        ensure_shape(gx, x.n, c_in, x.h, x.w);
        const size_t plane = size_t(x.h) * x.w;
        const size_t main_pl = plane - plane % kPxTile;
        for (int in = 0; in < x.n; ++in) {
            const T* xbase = x.channel(in, 0);
            const T* gbase = gy.channel(in, 0);
            T* gxbase = gx.channel(in, 0);
            for (size_t p0 = 0; p0 < main_pl; p0 += kPxTile) {
                int ci0 = 0;
                for (; ci0 + kCoTile <= c_in; ci0 += kCoTile)
                    tile4x16_t(gbase, w.data() + size_t(ci0) * c_out, plane, p0, c_out, c_in,
                               gxbase + size_t(ci0) * plane + p0,
                               gxbase + size_t(ci0 + 1) * plane + p0,
                               gxbase + size_t(ci0 + 2) * plane + p0,
                               gxbase + size_t(ci0 + 3) * plane + p0);
                for (; ci0 < c_in; ++ci0) {
                    T acc[kPxTile] = {};
                    for (int co = 0; co < c_out; ++co) {
                        const T wv = w[size_t(ci0) * c_out + co];
                        const T* gr = gbase + size_t(co) * plane + p0;
                        for (size_t q = 0; q < kPxTile; ++q) acc[q] += wv * gr[q];
                    }
                    T* dst = gxbase + size_t(ci0) * plane + p0;
                    for (size_t q = 0; q < kPxTile; ++q) dst[q] = acc[q];
                }
            }
            for (size_t p = main_pl; p < plane; ++p)
                for (int ci = 0; ci < c_in; ++ci) {
                    T acc = T(0);
                    for (int co = 0; co < c_out; ++co)
                        acc += w[size_t(ci) * c_out + co] * gbase[size_t(co) * plane + p];
                    gxbase[size_t(ci) * plane + p] = acc;
                }
            // gw += x g^T
            for (int ci = 0; ci < c_in; ++ci) {
                const T* src = xbase + size_t(ci) * plane;
                T* gwr = gw.data() + size_t(ci) * c_out;
                for (int co = 0; co < c_out; ++co)
                    gwr[co] += detail::lane_dot(gbase + size_t(co) * plane, src, plane);
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Standard convolution (for the non-separable ablation). Odd k, same zero
// padding, stride 1, no bias. Weights laid out (c_out, c_in, k, k).
// ---------------------------------------------------------------------------
template <typename T>
struct Conv2D {
    int c_in = 0, c_out = 0, k = 0;
    std::vector<T> w;

    Conv2D() = default;
    Conv2D(int c_in_, int c_out_, int k_)
        : c_in(c_in_), c_out(c_out_), k(k_), w(size_t(c_out_) * c_in_ * k_ * k_, T(0)) {}

    size_t param_count() const { return w.size(); }

    void forward(const Tensor4<T>& x, Tensor4<T>& y) const {
        if (x.c != c_in) throw ShapeError("conv2d: channel mismatch");
        ensure_shape(y, x.n, c_out, x.h, x.w);
        y.zero();
        const int p = k / 2;
        for (int in = 0; in < x.n; ++in)
            for (int co = 0; co < c_out; ++co) {
                T* dst = y.channel(in, co);
                for (int ci = 0; ci < c_in; ++ci) {
                    const T* src = x.channel(in, ci);
                    const T* kw = w.data() + (size_t(co) * c_in + ci) * k * k;
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const T wv = kw[ky * k + kx];
                            const int dy = ky - p, dx = kx - p;
                            const int y0 = std::max(0, -dy), y1 = x.h - std::max(0, dy);
                            const int x0 = std::max(0, -dx), x1 = x.w - std::max(0, dx);
                            for (int yy = y0; yy < y1; ++yy) {
                                T* d = dst + size_t(yy) * x.w;
                                const T* s = src + size_t(yy + dy) * x.w + dx;
                                for (int xx = x0; xx < x1; ++xx) d[xx] += wv * s[xx];
                            }
                        }
                }
            }
    }

    void backward(const Tensor4<T>& x, const Tensor4<T>& gy, Tensor4<T>& gx, std::vector<T>& gw) const {
        ensure_shape(gx, x.n, c_in, x.h, x.w);
        gx.zero();
        weight_grad(x, gy, gw);
        const int p = k / 2;
        for (int in = 0; in < x.n; ++in)
            for (int co = 0; co < c_out; ++co) {
                const T* g = gy.channel(in, co);
                for (int ci = 0; ci < c_in; ++ci) {
                    const T* kw = w.data() + (size_t(co) * c_in + ci) * k * k;
                    T* gxc = gx.channel(in, ci);
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const T wv = kw[ky * k + kx];
                            const int dy = ky - p, dx = kx - p;
                            const int y0 = std::max(0, -dy), y1 = x.h - std::max(0, dy);
                            const int x0 = std::max(0, -dx), x1 = x.w - std::max(0, dx);
                            for (int yy = y0; yy < y1; ++yy) {
                                const T* gr = g + size_t(yy) * x.w;
                                T* gxr = gxc + size_t(yy + dy) * x.w + dx;
                                for (int xx = x0; xx < x1; ++xx) gxr[xx] += wv * gr[xx];
                            }
                        }
                }
            }
    }

    void weight_grad(const Tensor4<T>& x, const Tensor4<T>& gy, std::vector<T>& gw) const {
        const int p = k / 2;
        for (int in = 0; in < x.n; ++in)
            for (int co = 0; co < c_out; ++co) {
                const T* g = gy.channel(in, co);
                for (int ci = 0; ci < c_in; ++ci) {
                    const T* src = x.channel(in, ci);
                    T* gwc = gw.data() + (size_t(co) * c_in + ci) * k * k;
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int dy = ky - p, dx = kx - p;
                            const int y0 = std::max(0, -dy), y1 = x.h - std::max(0, dy);
                            const int x0 = std::max(0, -dx), x1 = x.w - std::max(0, dx);
                            T acc = T(0);
                            for (int yy = y0; yy < y1; ++yy)
                                acc += detail::lane_dot(g + size_t(yy) * x.w + x0,
                                                        src + size_t(yy + dy) * x.w + dx + x0,
                                                        size_t(x1 - x0));
                            gwc[ky * k + kx] += acc;
                        }
                }
            }
    }
};

// ---------------------------------------------------------------------------
// Instance normalization without affine parameters: per (sample, channel)
// subtract the spatial mean and divide by sqrt(var + eps). A zero or
// constant channel maps to zeros, which keeps empty event frames inert.
// ---------------------------------------------------------------------------
template <typename T>
struct InstanceNorm {
    T eps = T(1e-5);

    void forward(const Tensor4<T>& x, Tensor4<T>& y) const {
        ensure_shape(y, x.n, x.c, x.h, x.w);
        const size_t plane = size_t(x.h) * x.w;
        for (int in = 0; in < x.n; ++in)
            for (int c = 0; c < x.c; ++c) {
                const T* src = x.channel(in, c);
                T* dst = y.channel(in, c);
                T mean, inv;
                stats(src, plane, mean, inv);
                for (size_t i = 0; i < plane; ++i) dst[i] = (src[i] - mean) * inv;
            }
    }

    // Normalization fused with ReLU: y = max(0, (x - mean) * inv).
    void forward_relu(const Tensor4<T>& x, Tensor4<T>& y) const {
        ensure_shape(y, x.n, x.c, x.h, x.w);
        const size_t plane = size_t(x.h) * x.w;
        for (int in = 0; in < x.n; ++in)
            for (int c = 0; c < x.c; ++c) {
                const T* src = x.channel(in, c);
                T* dst = y.channel(in, c);
                T mean, inv;
                stats(src, plane, mean, inv);
                for (size_t i = 0; i < plane; ++i) {
                    const T v = (src[i] - mean) * inv;
                    dst[i] = v > T(0) ? v : T(0);
                }
            }
    }

    void backward(const Tensor4<T>& x, const Tensor4<T>& gy, Tensor4<T>& gx) const {
        ensure_shape(gx, x.n, x.c, x.h, x.w);
        const size_t plane = size_t(x.h) * x.w;
        for (int in = 0; in < x.n; ++in)
            for (int c = 0; c < x.c; ++c) {
                const T* src = x.channel(in, c);
                const T* g = gy.channel(in, c);
                T* out = gx.channel(in, c);
                T mean, inv;
                stats(src, plane, mean, inv);
                const T gmean = detail::lane_sum(g, plane) / T(plane);
                T gdot = T(0);
                {
                    T s[8] = {};
                    size_t i = 0;
                    for (; i + 8 <= plane; i += 8)
                        for (int l = 0; l < 8; ++l) s[l] += g[i + l] * (src[i + l] - mean);
                    for (; i < plane; ++i) s[i % 8] += g[i] * (src[i] - mean);
                    gdot = ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
                }
                const T gproj = gdot * inv * inv / T(plane);
                for (size_t i = 0; i < plane; ++i)
                    out[i] = inv * (g[i] - gmean - (src[i] - mean) * gproj);
            }
    }

private:
    void stats(const T* src, size_t plane, T& mean, T& inv) const {
        double m, v;
        detail::lane_mean_var(src, plane, m, v);
        mean = static_cast<T>(m);
        inv = static_cast<T>(1.0 / std::sqrt(v + double(eps)));
    }
};

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------
template <typename T>
inline void relu_forward(const Tensor4<T>& x, Tensor4<T>& y) {
    ensure_shape(y, x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
}

template <typename T>
inline void relu_backward(const Tensor4<T>& x, const Tensor4<T>& gy, Tensor4<T>& gx) {
    ensure_shape(gx, x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i) gx.data[i] = x.data[i] > T(0) ? gy.data[i] : T(0);
}

// ReLU backward masked on the *output* (y > 0 iff x > 0 away from the kink,
// and the kink maps to 0 either way); lets the forward keep only the fused
// activation tensor.
template <typename T>
inline void relu_backward_from_output(const Tensor4<T>& y, const Tensor4<T>& gy, Tensor4<T>& gx) {
    ensure_shape(gx, y.n, y.c, y.h, y.w);
    for (size_t i = 0; i < y.size(); ++i) gx.data[i] = y.data[i] > T(0) ? gy.data[i] : T(0);
}

// ---------------------------------------------------------------------------
// Non-overlapping average pool, kernel k = stride k; incomplete border
// regions are discarded.
// ---------------------------------------------------------------------------
template <typename T>
inline void avg_pool_forward(const Tensor4<T>& x, int k, Tensor4<T>& y) {
    if (k > x.h || k > x.w) throw ShapeError("avg_pool: kernel larger than input");
    const int oh = x.h / k, ow = x.w / k;
    ensure_shape(y, x.n, x.c, oh, ow);
    const T norm = T(1) / T(k * k);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c) {
            const T* src = x.channel(in, c);
            T* dst = y.channel(in, c);
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    T acc = T(0);
                    for (int ky = 0; ky < k; ++ky) {
                        const T* row = src + size_t(oy * k + ky) * x.w + ox * k;
                        for (int kx = 0; kx < k; ++kx) acc += row[kx];
                    }
                    dst[size_t(oy) * ow + ox] = acc * norm;
                }
        }
}

// Gradient of the mean spreads uniformly over the k*k block; discarded
// border cells receive zero.
template <typename T>
inline void avg_pool_backward(const Tensor4<T>& x, int k, const Tensor4<T>& gy, Tensor4<T>& gx) {
    ensure_shape(gx, x.n, x.c, x.h, x.w);
    gx.zero();
    const int oh = x.h / k, ow = x.w / k;
    const T norm = T(1) / T(k * k);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c) {
            const T* g = gy.channel(in, c);
            T* dst = gx.channel(in, c);
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const T v = g[size_t(oy) * ow + ox] * norm;
                    for (int ky = 0; ky < k; ++ky) {
                        T* row = dst + size_t(oy * k + ky) * x.w + ox * k;
                        for (int kx = 0; kx < k; ++kx) row[kx] += v;
                    }
                }
        }
}

}  // namespace sgaze
