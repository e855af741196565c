#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sgaze/common.hpp"

namespace sgaze {

// Natural interpolating cubic spline over strictly increasing knots.
// Passes through every (t_i, y_i); second derivative zero at both ends.
// Evaluation outside [t_front, t_back] clamps to the boundary value.
class CubicSpline {
public:
    CubicSpline(std::vector<double> t, std::vector<double> y)
        : t_(std::move(t)), y_(std::move(y)) {
        const size_t n = t_.size();
        if (n < 4) throw std::invalid_argument("cubic spline needs at least 4 knots");
        if (y_.size() != n) throw std::invalid_argument("knot count mismatch");
        for (size_t i = 1; i < n; ++i)
            if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("knots must be increasing");

        // Tridiagonal solve for second derivatives m, natural ends m0 = mN = 0.
        m_.assign(n, 0.0);
        std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0);
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for (size_t i = 1; i + 1 < n; ++i) {
            const double h0 = t_[i] - t_[i - 1];
            const double h1 = t_[i + 1] - t_[i];
            sub[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        // Forward elimination; the first and last rows are identity.
        std::vector<double> sup(n, 0.0);
        for (size_t i = 1; i + 1 < n; ++i) sup[i] = t_[i + 1] - t_[i];
        for (size_t i = 2; i + 1 < n; ++i) {
            const double f = sub[i] / diag[i - 1];
            diag[i] -= f * sup[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        for (size_t i = n - 2; i >= 1; --i) {
            m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
            if (i == 1) break;
        }
    }

    double operator()(double x) const {
        const size_t n = t_.size();
        if (x <= t_.front()) return y_.front();
        if (x >= t_.back()) return y_.back();
        // Binary search for the segment with t[i] <= x < t[i+1].
        size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            if (t_[mid] <= x)
                lo = mid;
            else
                hi = mid;
        }
        const double h = t_[hi] - t_[lo];
        const double a = (t_[hi] - x) / h;
        const double b = (x - t_[lo]) / h;
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h) / 6.0;
    }

    double front_time() const { return t_.front(); }
    double back_time() const { return t_.back(); }

private:
    std::vector<double> t_, y_, m_;
};

}  // namespace sgaze
