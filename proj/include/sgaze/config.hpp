#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgaze/augment.hpp"
#include "sgaze/cost.hpp"
#include "sgaze/model.hpp"
#include "sgaze/synth.hpp"
#include "sgaze/train.hpp"

namespace sgaze {

// Flat `key = value` run configuration. Every knob has a registered default;
// unknown keys are rejected with the list of valid ones. The fully resolved
// config can be echoed back out for reproducible reruns.
class RunConfig {
public:
    RunConfig() { defaults(); }

    void set(const std::string& key, const std::string& value) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key `" + key + "`\n" + key_help());
        it->second = value;
    }

    const std::string& get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key `" + key + "`");
        return it->second;
    }

    double get_double(const std::string& key) const {
        const std::string& v = get(key);
        try {
            size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config key `" + key + "`: not a number: " + v);
        }
    }
    int get_int(const std::string& key) const {
        const double d = get_double(key);
        const int i = static_cast<int>(d);
        if (double(i) != d) throw ConfigError("config key `" + key + "`: not an integer");
        return i;
    }
    std::uint64_t get_u64(const std::string& key) const {
        const std::string& v = get(key);
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigError("config key `" + key + "`: not an unsigned integer: " + v);
        }
    }
    bool get_bool(const std::string& key) const {
        const std::string& v = get(key);
        if (v == "true" || v == "1" || v == "on") return true;
        if (v == "false" || v == "0" || v == "off") return false;
        throw ConfigError("config key `" + key + "`: expected a boolean, got " + v);
    }

    // Parses `key = value` lines; '#' comments and blank lines are skipped.
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            set(key, value);
        }
    }

    // `key=value` pair from a CLI override.
    void set_pair(const std::string& pair) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got " + pair);
        set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
    }

    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
        return os.str();
    }

    void write_file(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write config file: " + path);
        out << serialize();
    }

    std::string key_help() const {
        std::ostringstream os;
        os << "valid keys:";
        for (const auto& [k, v] : values_) os << " " << k;
        return os.str();
    }

    // --- typed views ---

    ModelConfig model() const {
        ModelConfig m;
        m.n = get_int("model.n");
        m.use_dsc = get_bool("model.use_dsc");
        m.seed = get_u64("model.seed");
        m.theta = get_double("model.theta");
        m.surrogate_slope = get_double("model.surrogate_slope");
        m.output_spiking = get_bool("model.output_spiking");
        m.membrane_uniform_init = get_bool("model.membrane_uniform_init");
        m.validate();
        return m;
    }

    TrainConfig train() const {
        TrainConfig t;
        t.lr = get_double("train.lr");
        t.epochs = get_int("train.epochs");
        t.window_ms = get_int("train.window_ms");
        t.stride_ms = get_int("train.stride_ms");
        t.batch = get_int("train.batch");
        t.adam_beta1 = get_double("train.adam_beta1");
        t.adam_beta2 = get_double("train.adam_beta2");
        t.adam_eps = get_double("train.adam_eps");
        t.seed = get_u64("train.seed");
        t.max_steps_per_epoch = get_int("train.max_steps_per_epoch");
        const std::string loss = get("train.loss");
        if (loss == "combined")
            t.velocity_loss = true;
        else if (loss == "spatial_mse")
            t.velocity_loss = false;
        else
            throw ConfigError("train.loss must be `combined` or `spatial_mse`");
        t.exclude_blinks_from_loss = get_bool("train.exclude_blinks_from_loss");
        t.grad_clip = get_double("train.grad_clip");
        t.augment = get_bool("train.augment");
        t.validate();
        return t;
    }

    AugmentConfig augment() const {
        AugmentConfig a;
        a.p_hflip = get_double("augment.p_hflip");
        a.p_vflip = get_double("augment.p_vflip");
        a.p_tflip = get_double("augment.p_tflip");
        a.max_spatial_shift = get_int("augment.max_spatial_shift");
        a.max_temporal_shift = get_int("augment.max_temporal_shift");
        a.cutout.count = get_int("augment.cutout_count");
        a.cutout.max_extent_xy = get_int("augment.cutout_max_xy");
        a.cutout.max_extent_t = get_int("augment.cutout_max_t");
        a.rng_seed = get_u64("augment.seed");
        return a;
    }

    SceneConfig scene() const {
        SceneConfig s;
        s.pupil_radius = get_double("scene.pupil_radius");
        s.bg_intensity = get_double("scene.bg_intensity");
        s.pupil_intensity = get_double("scene.pupil_intensity");
        s.lid_intensity = get_double("scene.lid_intensity");
        s.contrast_threshold = get_double("scene.contrast_threshold");
        s.px_per_deg = get_double("scene.px_per_deg");
        s.sacc_amp_min_deg = get_double("scene.sacc_amp_min_deg");
        s.sacc_amp_max_deg = get_double("scene.sacc_amp_max_deg");
        s.fix_dur_min_ms = get_double("scene.fix_dur_min_ms");
        s.fix_dur_max_ms = get_double("scene.fix_dur_max_ms");
        s.jitter_px = get_double("scene.jitter_px");
        s.pursuit_prob = get_double("scene.pursuit_prob");
        s.blink_rate_hz = get_double("scene.blink_rate_hz");
        s.blink_dur_min_ms = get_double("scene.blink_dur_min_ms");
        s.blink_dur_max_ms = get_double("scene.blink_dur_max_ms");
        s.session_ms = get_int("scene.session_ms");
        s.seed = get_u64("scene.seed");
        s.validate();
        return s;
    }

    EnergyModel energy() const {
        EnergyModel e;
        e.e_arith_pj = get_double("energy.e_arith_pj");
        e.e_mem_pj = get_double("energy.e_mem_pj");
        const std::string p = get("energy.load_policy");
        if (p == "weight_fetch")
            e.policy = EnergyModel::LoadPolicy::weight_fetch;
        else if (p == "state_only")
            e.policy = EnergyModel::LoadPolicy::state_only;
        else
            throw ConfigError("energy.load_policy must be `weight_fetch` or `state_only`");
        return e;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    void defaults() {
        values_ = {
            {"model.n", "128"},
            {"model.use_dsc", "true"},
            {"model.seed", "1"},
            {"model.theta", "1.0"},
            {"model.surrogate_slope", "25"},
            {"model.output_spiking", "false"},
            {"model.membrane_uniform_init", "false"},
            {"train.lr", "0.001"},
            {"train.epochs", "40"},
            {"train.window_ms", "450"},
            {"train.stride_ms", "10"},
            {"train.batch", "32"},
            {"train.adam_beta1", "0.9"},
            {"train.adam_beta2", "0.999"},
            {"train.adam_eps", "1e-8"},
            {"train.seed", "1"},
            {"train.max_steps_per_epoch", "0"},
            {"train.loss", "combined"},
            {"train.exclude_blinks_from_loss", "false"},
            {"train.grad_clip", "0"},
            {"train.augment", "true"},
            {"augment.p_hflip", "0.5"},
            {"augment.p_vflip", "0.5"},
            {"augment.p_tflip", "0.5"},
            {"augment.max_spatial_shift", "8"},
            {"augment.max_temporal_shift", "50"},
            {"augment.cutout_count", "1"},
            {"augment.cutout_max_xy", "20"},
            {"augment.cutout_max_t", "50"},
            {"augment.seed", "7"},
            {"scene.pupil_radius", "40"},
            {"scene.bg_intensity", "120"},
            {"scene.pupil_intensity", "30"},
            {"scene.lid_intensity", "80"},
            {"scene.contrast_threshold", "0.25"},
            {"scene.px_per_deg", "20"},
            {"scene.sacc_amp_min_deg", "2"},
            {"scene.sacc_amp_max_deg", "12"},
            {"scene.fix_dur_min_ms", "150"},
            {"scene.fix_dur_max_ms", "500"},
            {"scene.jitter_px", "0.15"},
            {"scene.pursuit_prob", "0.25"},
            {"scene.blink_rate_hz", "0.2"},
            {"scene.blink_dur_min_ms", "120"},
            {"scene.blink_dur_max_ms", "250"},
            {"scene.session_ms", "5000"},
            {"scene.seed", "1"},
            {"energy.e_arith_pj", "1.4"},
            {"energy.e_mem_pj", "3.7"},
            {"energy.load_policy", "weight_fetch"},
            {"cost.frequency_hz", "1000"},
        };
    }

    std::map<std::string, std::string> values_;
};

}  // namespace sgaze
