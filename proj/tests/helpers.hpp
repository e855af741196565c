#pragma once

#include <functional>
#include <random>
#include <vector>

#include "sgaze/tensor.hpp"

// Shared test utilities: independent brute-force references and a central
// finite-difference harness. These deliberately do not reuse the library's
// loop structures.

namespace testutil {

using sgaze::Tensor4;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

template <typename T>
inline void fill_uniform(std::vector<T>& v, std::mt19937_64& g, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    for (T& x : v) x = static_cast<T>(d(g));
}

template <typename T>
inline void fill_uniform(Tensor4<T>& t, std::mt19937_64& g, double lo, double hi) {
    fill_uniform(t.data, g, lo, hi);
}

// Direct zero-padded per-channel correlation.
template <typename T>
inline Tensor4<T> ref_depthwise_conv(const Tensor4<T>& x, const std::vector<T>& w, int k) {
    const int p = k / 2;
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    for (int n = 0; n < x.n; ++n)
        for (int c = 0; c < x.c; ++c)
            for (int oy = 0; oy < x.h; ++oy)
                for (int ox = 0; ox < x.w; ++ox) {
                    double acc = 0;
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy + ky - p, ix = ox + kx - p;
                            if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                            acc += double(w[(size_t(c) * k + ky) * k + kx]) * double(x.at(n, c, iy, ix));
                        }
                    y.at(n, c, oy, ox) = static_cast<T>(acc);
                }
    return y;
}

// Per-pixel matrix multiply across channels, weights (c_in, c_out).
template <typename T>
inline Tensor4<T> ref_pointwise_conv(const Tensor4<T>& x, const std::vector<T>& w, int c_out) {
    Tensor4<T> y(x.n, c_out, x.h, x.w);
    for (int n = 0; n < x.n; ++n)
        for (int oy = 0; oy < x.h; ++oy)
            for (int ox = 0; ox < x.w; ++ox)
                for (int co = 0; co < c_out; ++co) {
                    double acc = 0;
                    for (int ci = 0; ci < x.c; ++ci)
                        acc += double(w[size_t(ci) * c_out + co]) * double(x.at(n, ci, oy, ox));
                    y.at(n, co, oy, ox) = static_cast<T>(acc);
                }
    return y;
}

// Full convolution, weights (c_out, c_in, k, k).
template <typename T>
inline Tensor4<T> ref_conv2d(const Tensor4<T>& x, const std::vector<T>& w, int c_out, int k) {
    const int p = k / 2;
    Tensor4<T> y(x.n, c_out, x.h, x.w);
    for (int n = 0; n < x.n; ++n)
        for (int co = 0; co < c_out; ++co)
            for (int oy = 0; oy < x.h; ++oy)
                for (int ox = 0; ox < x.w; ++ox) {
                    double acc = 0;
                    for (int ci = 0; ci < x.c; ++ci)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                const int iy = oy + ky - p, ix = ox + kx - p;
                                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                                acc += double(w[((size_t(co) * x.c + ci) * k + ky) * k + kx]) *
                                       double(x.at(n, ci, iy, ix));
                            }
                    y.at(n, co, oy, ox) = static_cast<T>(acc);
                }
    return y;
}

template <typename T>
inline Tensor4<T> ref_avg_pool(const Tensor4<T>& x, int k) {
    Tensor4<T> y(x.n, x.c, x.h / k, x.w / k);
    for (int n = 0; n < x.n; ++n)
        for (int c = 0; c < x.c; ++c)
            for (int oy = 0; oy < y.h; ++oy)
                for (int ox = 0; ox < y.w; ++ox) {
                    double acc = 0;
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx)
                            acc += double(x.at(n, c, oy * k + ky, ox * k + kx));
                    y.at(n, c, oy, ox) = static_cast<T>(acc / (k * k));
                }
    return y;
}

template <typename T>
inline Tensor4<T> ref_instance_norm(const Tensor4<T>& x, double eps) {
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    for (int n = 0; n < x.n; ++n)
        for (int c = 0; c < x.c; ++c) {
            double mean = 0;
            for (int iy = 0; iy < x.h; ++iy)
                for (int ix = 0; ix < x.w; ++ix) mean += double(x.at(n, c, iy, ix));
            mean /= double(x.h) * x.w;
            double var = 0;
            for (int iy = 0; iy < x.h; ++iy)
                for (int ix = 0; ix < x.w; ++ix) {
                    const double d = double(x.at(n, c, iy, ix)) - mean;
                    var += d * d;
                }
            var /= double(x.h) * x.w;
            const double inv = 1.0 / std::sqrt(var + eps);
            for (int iy = 0; iy < x.h; ++iy)
                for (int ix = 0; ix < x.w; ++ix)
                    y.at(n, c, iy, ix) = static_cast<T>((double(x.at(n, c, iy, ix)) - mean) * inv);
        }
    return y;
}

template <typename T>
inline double max_abs_diff(const Tensor4<T>& a, const Tensor4<T>& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(double(a.data[i]) - double(b.data[i])));
    return m;
}

// Central finite differences of a scalar function over a flat buffer,
// compared against analytic gradients. Returns the worst relative error.
inline double fd_check(std::vector<double>& x, const std::function<double()>& eval,
                       const std::vector<double>& analytic, double h = 1e-5) {
    double worst = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double fp = eval();
        x[i] = keep - h;
        const double fm = eval();
        x[i] = keep;
        const double num = (fp - fm) / (2 * h);
        const double err = std::abs(num - analytic[i]) /
                           std::max({std::abs(num), std::abs(analytic[i]), 1e-3});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace testutil
