#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "sgaze/common.hpp"

namespace sgaze {

// Dense row-major (n, c, h, w) tensor. Value semantics, no views.
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), data(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

    size_t size() const { return data.size(); }
    int plane() const { return h * w; }

    T& at(int in, int ic, int iy, int ix) {
        assert(in >= 0 && in < n && ic >= 0 && ic < c && iy >= 0 && iy < h && ix >= 0 && ix < w);
        return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    T at(int in, int ic, int iy, int ix) const {
        assert(in >= 0 && in < n && ic >= 0 && ic < c && iy >= 0 && iy < h && ix >= 0 && ix < w);
        return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    T* channel(int in, int ic) { return data.data() + (static_cast<size_t>(in) * c + ic) * h * w; }
    const T* channel(int in, int ic) const {
        return data.data() + (static_cast<size_t>(in) * c + ic) * h * w;
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(T(0)); }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool all_finite() const {
        for (const T& v : data)
            if (!is_finite(v)) return false;
        return true;
    }
};

}  // namespace sgaze
