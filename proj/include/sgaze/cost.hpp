#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sgaze/model.hpp"
#include "sgaze/stream.hpp"

namespace sgaze {

// Per-layer operation counts for one network step (one 1 ms inference).
struct LayerOps {
    std::string name;
    std::uint64_t macs = 0;           // multiply-accumulates (synaptic work)
    std::uint64_t adds = 0;           // bias adds
    std::uint64_t comparisons = 0;    // threshold checks of spiking neurons
    std::uint64_t state_updates = 0;  // decay+integrate, one per neuron
};

struct OpCount {
    std::vector<LayerOps> layers;
    std::string convention;

    std::uint64_t total_macs() const {
        std::uint64_t s = 0;
        for (const auto& l : layers) s += l.macs;
        return s;
    }
    std::uint64_t total_adds() const {
        std::uint64_t s = 0;
        for (const auto& l : layers) s += l.adds;
        return s;
    }
    std::uint64_t total_comparisons() const {
        std::uint64_t s = 0;
        for (const auto& l : layers) s += l.comparisons;
        return s;
    }
    std::uint64_t total_state_updates() const {
        std::uint64_t s = 0;
        for (const auto& l : layers) s += l.state_updates;
        return s;
    }
    // MAC counted as two ops (multiply + add); a state update is a decay
    // multiply plus an integrate add.
    std::uint64_t flops_mac2() const {
        return 2 * total_macs() + total_adds() + 2 * total_state_updates() + total_comparisons();
    }
    // MAC counted as one fused op, state update likewise.
    std::uint64_t flops_mac1() const {
        return total_macs() + total_adds() + total_state_updates() + total_comparisons();
    }
    // Arithmetic-op count used for energy projection (MAC-as-2 convention).
    std::uint64_t arithmetic_ops() const { return flops_mac2(); }
};

// Spatial trace of the conv trunk: input 60x80, pooled by 3, 3, 4.
struct StageDims {
    int h, w;
};
inline std::vector<StageDims> spatial_trace() {
    std::vector<StageDims> dims;
    int h = kGridHeight, w = kGridWidth;
    dims.push_back({h, w});
    for (int k : {3, 3, 4}) {
        h /= k;
        w /= k;
        dims.push_back({h, w});
    }
    return dims;
}

// Dense (every-op) counts per inference step from shape algebra. Conv MACs
// count k*k taps per output pixel (zero padding included), matching the
// usual convention. Pooling, normalization and activations follow the
// paper's accounting and are excluded.
inline OpCount count_dense_ops(const ModelConfig& cfg) {
    cfg.validate();
    OpCount oc;
    oc.convention =
        "conv/dense MACs with same-padding taps; LIF state update = 1 mul + 1 add per neuron "
        "per step; threshold = 1 comparison per spiking neuron; IN/ReLU/pool excluded";
    const auto dims = spatial_trace();
    auto plane = [&](int stage) { return std::uint64_t(dims[stage].h) * dims[stage].w; };
    const std::uint64_t n = cfg.n;

    if (cfg.use_dsc) {
        oc.layers.push_back({"conv1.dw", 2 * 49 * plane(0), 0, 0, 0});
        oc.layers.push_back({"conv1.pw", 2 * 32 * plane(0), 0, 0, 0});
        oc.layers.push_back({"conv2.dw", 32 * 25 * plane(1), 0, 0, 0});
        oc.layers.push_back({"conv2.pw", std::uint64_t(32) * 128 * plane(1), 0, 0, 0});
        oc.layers.push_back({"conv3.dw", std::uint64_t(128) * 25 * plane(2), 0, 0, 0});
        oc.layers.push_back({"conv3.pw", std::uint64_t(128) * n * plane(2), 0, 0, 0});
    } else {
        oc.layers.push_back({"conv1", std::uint64_t(32) * 2 * 49 * plane(0), 0, 0, 0});
        oc.layers.push_back({"conv2", std::uint64_t(128) * 32 * 25 * plane(1), 0, 0, 0});
        oc.layers.push_back({"conv3", n * 128 * 25 * plane(2), 0, 0, 0});
    }
    const std::uint64_t flat = 2 * n * plane(3);  // = 2N
    oc.layers.push_back({"lif1", flat * 256, 256, 256, 256});
    oc.layers.push_back({"lif2", std::uint64_t(256) * 64, 64, 64, 64});
    oc.layers.push_back(
        {"lif3", std::uint64_t(64) * 2, 2, cfg.output_spiking ? std::uint64_t(2) : 0, 2});
    return oc;
}

// Expected runtime counts: synaptic work of each layer scales with how
// active its input is; state updates, bias adds and threshold checks happen
// every step regardless.
inline OpCount count_sparse_ops(const OpCount& dense, const ActivityStats& stats,
                                const ModelConfig& cfg) {
    const size_t nconv = cfg.use_dsc ? 6 : 3;
    if (stats.conv_in_occ.size() != nconv || stats.lif_rate.size() < 2)
        throw ConfigError("activity stats do not match the model layout");
    OpCount oc = dense;
    oc.convention = dense.convention + "; synaptic ops scaled by measured input activity";
    auto scale = [](std::uint64_t v, double f) {
        return static_cast<std::uint64_t>(std::llround(double(v) * std::min(std::max(f, 0.0), 1.0)));
    };
    for (size_t i = 0; i < nconv; ++i) oc.layers[i].macs = scale(dense.layers[i].macs, stats.conv_in_occ[i]);
    oc.layers[nconv + 0].macs = scale(dense.layers[nconv + 0].macs, stats.flatten_occ);
    oc.layers[nconv + 1].macs = scale(dense.layers[nconv + 1].macs, stats.lif_rate[0]);
    oc.layers[nconv + 2].macs = scale(dense.layers[nconv + 2].macs, stats.lif_rate[1]);
    return oc;
}

// SENeCA-style energy coefficients and the mapping from op counts to memory
// loads. Both load policies are documented in the report assumptions.
struct EnergyModel {
    double e_arith_pj = 1.4;
    double e_mem_pj = 3.7;
    enum class LoadPolicy {
        weight_fetch,  // one load per synaptic event (weight fetch) + one per state update
        state_only,    // weights resident near the cores; loads = state read + write
    };
    LoadPolicy policy = LoadPolicy::weight_fetch;

    std::uint64_t loads(const OpCount& oc) const {
        switch (policy) {
            case LoadPolicy::weight_fetch:
                return oc.total_macs() + oc.total_state_updates();
            case LoadPolicy::state_only:
                return 2 * oc.total_state_updates();
        }
        return 0;
    }
    std::string policy_name() const {
        return policy == LoadPolicy::weight_fetch ? "weight_fetch" : "state_only";
    }
};

struct PowerProjection {
    double energy_uj = 0;  // per inference step
    double power_mw = 0;   // at the given frequency
    std::uint64_t n_arith = 0;
    std::uint64_t n_load = 0;
};

// E = e_arith * N_arith + e_mem * N_load per step; P = E * f.
inline PowerProjection project_power(std::uint64_t n_arith, std::uint64_t n_load,
                                     const EnergyModel& em, double f_hz) {
    PowerProjection p;
    p.n_arith = n_arith;
    p.n_load = n_load;
    p.energy_uj = (em.e_arith_pj * double(n_arith) + em.e_mem_pj * double(n_load)) * 1e-6;
    p.power_mw = p.energy_uj * f_hz * 1e-3;  // uJ * Hz = uW
    return p;
}

inline PowerProjection project_power(const OpCount& oc, const EnergyModel& em, double f_hz) {
    return project_power(oc.arithmetic_ops(), em.loads(oc), em, f_hz);
}

// Pipelined execution: each spiking stage adds one timestep of latency.
inline double project_latency_ms(int n_stages, double f_hz) {
    if (f_hz <= 0) throw ConfigError("frequency must be positive");
    if (n_stages < 0) throw ConfigError("stage count must be non-negative");
    return double(n_stages) * 1000.0 / f_hz;
}

struct CostReport {
    int n = 0;
    bool use_dsc = true;
    std::uint64_t params = 0;
    OpCount dense;
    bool has_sparse = false;
    OpCount sparse;
    double frequency_hz = 1000.0;
    PowerProjection dense_power;
    PowerProjection sparse_power;
    double latency_ms = 0;
    int n_stages = 3;
    std::vector<std::string> assumptions;
};

template <typename T>
inline CostReport build_cost_report(Network<T>& net, const EnergyModel& em, double f_hz,
                                    const ActivityStats* stats = nullptr) {
    CostReport r;
    r.n = net.cfg.n;
    r.use_dsc = net.cfg.use_dsc;
    r.params = net.count_params();
    r.dense = count_dense_ops(net.cfg);
    r.frequency_hz = f_hz;
    r.n_stages = net.n_spiking_stages();
    r.latency_ms = project_latency_ms(r.n_stages, f_hz);
    r.dense_power = project_power(r.dense, em, f_hz);
    if (stats) {
        r.sparse = count_sparse_ops(r.dense, *stats, net.cfg);
        r.sparse_power = project_power(r.sparse, em, f_hz);
        r.has_sparse = true;
    }
    r.assumptions = {
        "op convention: " + r.dense.convention,
        "FLOPs reported both MAC-as-2 (multiply+add) and MAC-as-1 (fused)",
        "arithmetic ops for energy use the MAC-as-2 convention",
        "load policy `" + em.policy_name() + "`: " +
            (em.policy == EnergyModel::LoadPolicy::weight_fetch
                 ? "one load per synaptic event (weight fetch) plus one per neuron-state update"
                 : "weights core-resident; one read plus one write per neuron-state update"),
        "energy " + std::to_string(em.e_arith_pj) + " pJ/arith op, " +
            std::to_string(em.e_mem_pj) + " pJ/load",
        "latency: one timestep per spiking stage (pipelined layers)",
        "published FLOP totals for this architecture are not reproducible from shape algebra "
        "under any single convention; both conventions are reported instead of tuning to match",
    };
    return r;
}

}  // namespace sgaze
