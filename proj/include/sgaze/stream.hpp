#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sgaze/dataset.hpp"
#include "sgaze/events.hpp"
#include "sgaze/model.hpp"

namespace sgaze {

// Averaged per-layer activity over the observed steps.
struct ActivityStats {
    std::vector<double> conv_in_occ;  // occupancy at each conv input
    double flatten_occ = 0;
    std::vector<double> lif_rate;  // spikes/neuron/step per LIF layer
    std::uint64_t steps = 0;

    double input_occupancy() const { return conv_in_occ.empty() ? 0.0 : conv_in_occ[0]; }
};

// Continuous 1 kHz inference over an unbounded event stream. Events are
// accumulated into the open 1 ms bin; tick() steps the network on the binned
// frame and advances the clock. Membrane state is carried for the whole
// session; reset_state() is the only reset path.
template <typename T>
class StreamEngine {
public:
    explicit StreamEngine(const Network<T>& net)
        : net_(&net), state_(net.initial_state()), frame_(1, 2, kGridHeight, kGridWidth) {}

    // Accumulates one event into the open bin. Events older than the open
    // bin are dropped and counted; future timestamps violate the contract.
    void push_event(const Event& e) {
        const std::int64_t bin = e.t / 1000;
        if (bin < clock_) {
            ++stale_;
            return;
        }
        if (bin > clock_)
            throw std::logic_error("event timestamp beyond the open 1 ms bin");
        frame_.data[event_cell(e)] += T(1);
    }

    void push_events(std::span<const Event> events) {
        for (const Event& e : events) push_event(e);
    }

    // Adds pre-binned counts of the open bin (replay of recorded sessions).
    void push_binned(const SparseFrame& f) {
        for (const auto& [idx, count] : f.cells) frame_.data[idx] += T(count);
    }

    // Closes the open bin: one network step on the accumulated frame.
    // Returns the prediction in 80x60 pixels.
    std::array<T, 2> tick() {
        StepProbe probe;
        std::copy(frame_.data.begin(), frame_.data.end(), ws_.x0.data.begin());
        const auto norm = net_->forward_step(state_, ws_, &probe);
        frame_.zero();
        ++clock_;
        accumulate(probe);
        return to_pixels(norm);
    }

    // Mean activity since start (or the last probe reset). At least one
    // observed step is required.
    ActivityStats snapshot_activity() const {
        if (probe_steps_ == 0) throw std::logic_error("no steps observed");
        ActivityStats s;
        const int nconv = net_->cfg.use_dsc ? 6 : 3;
        s.conv_in_occ.assign(occ_sum_.begin(), occ_sum_.begin() + nconv);
        for (double& v : s.conv_in_occ) v /= double(probe_steps_);
        s.flatten_occ = flat_occ_sum_ / double(probe_steps_);
        s.lif_rate = {rate_sum_[0] / double(probe_steps_), rate_sum_[1] / double(probe_steps_),
                      rate_sum_[2] / double(probe_steps_)};
        s.steps = probe_steps_;
        return s;
    }

    void reset_probes() {
        occ_sum_.fill(0);
        rate_sum_.fill(0);
        flat_occ_sum_ = 0;
        probe_steps_ = 0;
    }

    // Explicit state reset; never called implicitly.
    void reset_state() { state_ = net_->initial_state(); }

    std::int64_t clock() const { return clock_; }
    std::int64_t stale_events() const { return stale_; }
    const NetState<T>& state() const { return state_; }

private:
    void accumulate(const StepProbe& p) {
        for (size_t i = 0; i < p.conv_in_occ.size(); ++i) occ_sum_[i] += p.conv_in_occ[i];
        flat_occ_sum_ += p.flatten_occ;
        for (size_t i = 0; i < 3; ++i) rate_sum_[i] += p.lif_rate[i];
        ++probe_steps_;
    }

    const Network<T>* net_;
    NetState<T> state_;
    Workspace<T> ws_;
    Tensor4<T> frame_;
    std::int64_t clock_ = 0;
    std::int64_t stale_ = 0;
    std::array<double, 6> occ_sum_{};
    std::array<double, 3> rate_sum_{};
    double flat_occ_sum_ = 0;
    std::uint64_t probe_steps_ = 0;
};

// Replays a recorded session through the engine; predictions come back in
// pixels, one per 1 ms bin.
template <typename T>
inline std::vector<T> stream_session(StreamEngine<T>& engine, const Session& s) {
    std::vector<T> preds;
    preds.reserve(s.frames.size() * 2);
    for (size_t k = 0; k < s.frames.size(); ++k) {
        engine.push_binned(s.frames[k]);
        const auto p = engine.tick();
        preds.push_back(p[0]);
        preds.push_back(p[1]);
    }
    return preds;
}

}  // namespace sgaze
