#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sgaze/model.hpp"

namespace sgaze {

// Adam with bias correction. Moments are kept in double regardless of the
// parameter type. A step with any non-finite gradient is skipped and counted
// rather than poisoning the parameters.
template <typename T>
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    std::int64_t skipped = 0;
    std::vector<std::vector<double>> m, v;

    void init(const std::vector<ParamRef<T>>& params) {
        m.resize(params.size());
        v.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m[i].assign(params[i].data->size(), 0.0);
            v[i].assign(params[i].data->size(), 0.0);
        }
    }

    // Returns false when the step was skipped due to non-finite gradients.
    bool step(const std::vector<ParamRef<T>>& params, const GradVecs<T>& grads) {
        if (m.empty()) init(params);
        if (!grads.all_finite()) {
            ++skipped;
            return false;
        }
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, double(t));
        const double bc2 = 1.0 - std::pow(beta2, double(t));
        for (size_t i = 0; i < params.size(); ++i) {
            std::vector<T>& p = *params[i].data;
            const std::vector<T>& g = grads.g[i];
            std::vector<double>& mi = m[i];
            std::vector<double>& vi = v[i];
            for (size_t j = 0; j < p.size(); ++j) {
                const double gj = double(g[j]);
                mi[j] = beta1 * mi[j] + (1.0 - beta1) * gj;
                vi[j] = beta2 * vi[j] + (1.0 - beta2) * gj * gj;
                const double mhat = mi[j] / bc1;
                const double vhat = vi[j] / bc2;
                p[j] = static_cast<T>(double(p[j]) - lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
        return true;
    }
};

}  // namespace sgaze
