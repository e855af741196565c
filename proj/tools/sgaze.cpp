// Command-line front end: synthetic data generation, training, evaluation,
// continuous streaming inference and hardware cost projection.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <sstream>

#include "sgaze/config.hpp"
#include "sgaze/cost.hpp"
#include "sgaze/dataset.hpp"
#include "sgaze/serialize.hpp"
#include "sgaze/stream.hpp"
#include "sgaze/synth.hpp"
#include "sgaze/train.hpp"

namespace fs = std::filesystem;
using namespace sgaze;

namespace {

using Net = Network<float>;

// locale-independent number formatting for every emitted value
template <typename T>
std::string fmt(T v, int precision = 6) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(precision) << v;
    return os.str();
}

struct SessionFiles {
    std::string events, labels, stem;
};

std::vector<SessionFiles> find_sessions(const std::string& dir) {
    std::vector<SessionFiles> out;
    if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir);
    std::vector<std::string> event_files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("events_", 0) == 0 && name.size() > 11 &&
            name.substr(name.size() - 4) == ".csv")
            event_files.push_back(e.path().string());
    }
    std::sort(event_files.begin(), event_files.end());
    for (const std::string& ev : event_files) {
        SessionFiles sf;
        sf.events = ev;
        const std::string name = fs::path(ev).filename().string();
        sf.stem = name.substr(7, name.size() - 11);
        sf.labels = (fs::path(dir) / ("labels_" + sf.stem + ".csv")).string();
        if (!fs::exists(sf.labels)) throw ParseError("missing labels for " + ev);
        out.push_back(sf);
    }
    if (out.empty()) throw ParseError("no events_*.csv sessions in " + dir);
    return out;
}

std::vector<Session> load_sessions(const std::vector<SessionFiles>& files) {
    std::vector<Session> sessions;
    sessions.reserve(files.size());
    for (const auto& f : files) sessions.push_back(load_session(f.events, f.labels));
    return sessions;
}

void echo_config(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    cfg.write_file((fs::path(out_dir) / "run_config.txt").string());
}

void print_metrics(const MetricReport& r, std::ostream& os) {
    os << "frames_scored " << r.frames_scored << "\n";
    os << "frames_blinked " << r.frames_blinked << "\n";
    for (const auto& [tol, frac] : r.p_acc)
        os << "P" << tol << " " << fmt(100.0 * frac, 4) << "\n";
    os << "euclidean_px " << fmt(r.euclidean, 6) << "\n";
}

int cmd_synth(const RunConfig& cfg, const std::string& out_dir, int sessions) {
    const SceneConfig base = cfg.scene();
    echo_config(cfg, out_dir);
    for (int s = 0; s < sessions; ++s) {
        SceneConfig sc = base;
        sc.seed = substream_seed(base.seed, s);
        const GroundTruth gt = gen_trajectory(sc);
        const auto events = render_events(gt, sc);
        const LabelTrack labels100 = export_labels_100hz(gt, sc);
        std::ostringstream idx;
        idx << std::setw(3) << std::setfill('0') << s;
        save_events_csv((fs::path(out_dir) / ("events_" + idx.str() + ".csv")).string(), events);
        save_labels_csv((fs::path(out_dir) / ("labels_" + idx.str() + ".csv")).string(), labels100);
        std::cout << "session " << idx.str() << ": " << events.size() << " events, "
                  << sc.session_ms << " ms\n";
    }
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data_dir, const std::string& out_dir,
              int val_count) {
    const auto files = find_sessions(data_dir);
    if (val_count <= 0) val_count = std::max<int>(1, int(files.size()) / 5);
    if (val_count >= int(files.size()))
        throw ConfigError("val sessions (" + std::to_string(val_count) +
                          ") must leave at least one training session");
    auto sessions = load_sessions(files);
    std::vector<Session> train_s(sessions.begin(), sessions.end() - val_count);
    std::vector<Session> val_s(sessions.end() - val_count, sessions.end());

    TrainConfig tc = cfg.train();
    tc.verbose = true;
    const ModelConfig mc = cfg.model();
    const AugmentConfig ac = cfg.augment();
    echo_config(cfg, out_dir);

    auto result = train<float>(train_s, val_s, tc, mc, ac);

    std::ofstream hist((fs::path(out_dir) / "history.csv").string());
    hist << "epoch,loss,l_pos,l_vel,val_euc,val_p1,val_p3,val_p5,val_p10,val_frames\n";
    for (const auto& e : result.history) {
        auto p = e.val.p_acc;
        hist << e.epoch << ',' << fmt(e.loss) << ',' << fmt(e.l_pos) << ',' << fmt(e.l_vel) << ','
             << fmt(e.val.euclidean) << ',' << fmt(p[1]) << ',' << fmt(p[3]) << ',' << fmt(p[5])
             << ',' << fmt(p[10]) << ',' << e.val.frames_scored << "\n";
    }
    save_model(result.net, (fs::path(out_dir) / "best.sgz").string());
    std::cout << "best epoch " << result.best_epoch << ", val euclidean "
              << fmt(result.best_val_euclidean) << " px\n";
    std::cout << "weights: " << (fs::path(out_dir) / "best.sgz").string() << "\n";
    if (result.skipped_steps)
        std::cout << "skipped optimizer steps (non-finite grads): " << result.skipped_steps << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_dir) {
    Net net = load_model<float>(model_path);
    const auto sessions = load_sessions(find_sessions(data_dir));
    const MetricReport r = evaluate_streaming(net, sessions);
    print_metrics(r, std::cout);
    return 0;
}

int cmd_stream(const std::string& model_path, const std::string& events_path,
               const std::string& labels_path, const std::string& out_path) {
    Net net = load_model<float>(model_path);
    const auto events = load_events(events_path);
    LabelTrack labels;
    bool have_labels = false;
    if (!labels_path.empty()) {
        labels = interpolate_labels(load_labels(labels_path), 1000.0);
        have_labels = true;
    }
    int duration = have_labels ? labels.size()
                               : (events.empty() ? 0 : int(events.back().t / 1000) + 1);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ParseError("cannot write " + out_path);
        os = &file;
    }
    *os << "t_ms,x_pred,y_pred";
    if (have_labels) *os << ",x_gt,y_gt,dist";
    *os << "\n";

    StreamEngine<float> engine(net);
    size_t i = 0;
    for (int t = 0; t < duration; ++t) {
        while (i < events.size() && events[i].t < std::int64_t(t + 1) * 1000) {
            if (events[i].t >= std::int64_t(t) * 1000) engine.push_event(events[i]);
            ++i;
        }
        const auto p = engine.tick();
        *os << t << ',' << fmt(p[0]) << ',' << fmt(p[1]);
        if (have_labels) {
            const LabelSample& l = labels.samples[t];
            const double d = std::hypot(double(p[0]) - l.x, double(p[1]) - l.y);
            *os << ',' << fmt(l.x) << ',' << fmt(l.y) << ',' << fmt(d);
        }
        *os << "\n";
    }
    return 0;
}

void print_cost_report(const CostReport& r, std::ostream& os) {
    os << "model N=" << r.n << (r.use_dsc ? " (separable convs)" : " (standard convs)") << "\n";
    os << "params " << r.params << "\n";
    os << "\nper-layer dense ops (one 1 ms step):\n";
    os << std::left << std::setw(10) << "layer" << std::right << std::setw(12) << "macs"
       << std::setw(8) << "adds" << std::setw(8) << "cmps" << std::setw(10) << "updates" << "\n";
    for (const auto& l : r.dense.layers)
        os << std::left << std::setw(10) << l.name << std::right << std::setw(12) << l.macs
           << std::setw(8) << l.adds << std::setw(8) << l.comparisons << std::setw(10)
           << l.state_updates << "\n";
    os << "dense FLOPs: " << r.dense.flops_mac2() << " (MAC-as-2) / " << r.dense.flops_mac1()
       << " (MAC-as-1)\n";
    if (r.has_sparse)
        os << "sparse FLOPs: " << r.sparse.flops_mac2() << " (MAC-as-2) / "
           << r.sparse.flops_mac1() << " (MAC-as-1)\n";
    os << "\nprojection @ " << fmt(r.frequency_hz, 6) << " Hz\n";
    os << "  dense:  " << fmt(r.dense_power.energy_uj, 4) << " uJ/step, "
       << fmt(r.dense_power.power_mw, 4) << " mW\n";
    if (r.has_sparse)
        os << "  sparse: " << fmt(r.sparse_power.energy_uj, 4) << " uJ/step, "
           << fmt(r.sparse_power.power_mw, 4) << " mW\n";
    os << "  latency: " << fmt(r.latency_ms, 4) << " ms (" << r.n_stages << " spiking stages)\n";
    os << "\nassumptions:\n";
    for (const auto& a : r.assumptions) os << "  - " << a << "\n";
}

void write_cost_json(const CostReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out.imbue(std::locale::classic());
    auto layers_json = [](const OpCount& oc) {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << "[";
        for (size_t i = 0; i < oc.layers.size(); ++i) {
            const auto& l = oc.layers[i];
            os << (i ? "," : "") << "{\"name\":\"" << l.name << "\",\"macs\":" << l.macs
               << ",\"adds\":" << l.adds << ",\"comparisons\":" << l.comparisons
               << ",\"state_updates\":" << l.state_updates << "}";
        }
        os << "]";
        return os.str();
    };
    out << "{\"n\":" << r.n << ",\"use_dsc\":" << (r.use_dsc ? "true" : "false")
        << ",\"params\":" << r.params << ",\"dense_flops_mac2\":" << r.dense.flops_mac2()
        << ",\"dense_flops_mac1\":" << r.dense.flops_mac1()
        << ",\"dense_layers\":" << layers_json(r.dense);
    if (r.has_sparse)
        out << ",\"sparse_flops_mac2\":" << r.sparse.flops_mac2()
            << ",\"sparse_flops_mac1\":" << r.sparse.flops_mac1()
            << ",\"sparse_layers\":" << layers_json(r.sparse);
    out << ",\"frequency_hz\":" << r.frequency_hz
        << ",\"dense_energy_uj\":" << r.dense_power.energy_uj
        << ",\"dense_power_mw\":" << r.dense_power.power_mw;
    if (r.has_sparse)
        out << ",\"sparse_energy_uj\":" << r.sparse_power.energy_uj
            << ",\"sparse_power_mw\":" << r.sparse_power.power_mw;
    out << ",\"latency_ms\":" << r.latency_ms << ",\"n_stages\":" << r.n_stages
        << ",\"assumptions\":[";
    for (size_t i = 0; i < r.assumptions.size(); ++i)
        out << (i ? "," : "") << "\"" << r.assumptions[i] << "\"";
    out << "]}\n";
}

int cmd_cost(const RunConfig& cfg, const std::string& model_path, bool measure,
             const std::string& json_path) {
    Net net = model_path.empty() ? Net::build(cfg.model()) : load_model<float>(model_path);
    const EnergyModel em = cfg.energy();
    const double f = cfg.get_double("cost.frequency_hz");

    ActivityStats stats;
    bool have_stats = false;
    if (measure) {
        SceneConfig sc = cfg.scene();
        const GroundTruth gt = gen_trajectory(sc);
        const auto events = render_events(gt, sc);
        const Session sess = make_session(events, ground_truth_labels_1khz(gt, sc));
        StreamEngine<float> engine(net);
        stream_session(engine, sess);
        stats = engine.snapshot_activity();
        have_stats = true;
        std::cout << "measured activity over " << stats.steps << " steps of a synthetic session\n";
    }
    const CostReport r = build_cost_report(net, em, f, have_stats ? &stats : nullptr);
    print_cost_report(r, std::cout);
    if (!json_path.empty()) write_cost_json(r, json_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spiking pupil tracker: event pipeline, training, 1 kHz streaming inference "
                 "and neuromorphic cost projection"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--set", overrides, "override single keys, e.g. --set model.n=256");

    auto* synth = app.add_subcommand("synth", "generate synthetic event/label sessions");
    std::string synth_out = "synth_out";
    int synth_sessions = 1;
    std::uint64_t synth_seed = 0;
    bool synth_seed_set = false;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--sessions", synth_sessions, "number of sessions");
    synth->add_option("--seed", synth_seed, "scene seed (overrides scene.seed)")
        ->each([&](const std::string&) { synth_seed_set = true; });

    auto* train_cmd = app.add_subcommand("train", "train on a session directory");
    std::string train_data, train_out = "train_out";
    int train_val = 0;
    train_cmd->add_option("--data", train_data, "session directory")->required();
    train_cmd->add_option("--out", train_out, "output directory");
    train_cmd->add_option("--val-count", train_val, "sessions held out for validation");

    auto* eval_cmd = app.add_subcommand("eval", "streaming evaluation of a trained model");
    std::string eval_model, eval_data;
    eval_cmd->add_option("--model", eval_model, "weight file")->required();
    eval_cmd->add_option("--data", eval_data, "session directory")->required();

    auto* stream_cmd = app.add_subcommand("stream", "continuous 1 kHz inference over an event CSV");
    std::string stream_model, stream_events, stream_labels, stream_out;
    stream_cmd->add_option("--model", stream_model, "weight file")->required();
    stream_cmd->add_option("--events", stream_events, "event CSV")->required();
    stream_cmd->add_option("--labels", stream_labels, "100 Hz label CSV (adds ground-truth columns)");
    stream_cmd->add_option("--out", stream_out, "output CSV (default stdout)");

    auto* cost_cmd = app.add_subcommand("cost", "op counts, energy, power and latency projection");
    std::string cost_model, cost_json;
    int cost_n = 0;
    bool cost_measure = false;
    cost_cmd->add_option("--model", cost_model, "weight file (instead of --n)");
    cost_cmd->add_option("--n", cost_n, "model width N (uses config defaults otherwise)");
    cost_cmd->add_flag("--measure", cost_measure, "measure activity on a synthetic session");
    cost_cmd->add_option("--json", cost_json, "also write a machine-readable JSON report");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const std::string& kv : overrides) cfg.set_pair(kv);

        if (*synth) {
            if (synth_seed_set) cfg.set("scene.seed", std::to_string(synth_seed));
            return cmd_synth(cfg, synth_out, synth_sessions);
        }
        if (*train_cmd) return cmd_train(cfg, train_data, train_out, train_val);
        if (*eval_cmd) return cmd_eval(eval_model, eval_data);
        if (*stream_cmd) return cmd_stream(stream_model, stream_events, stream_labels, stream_out);
        if (*cost_cmd) {
            if (cost_n > 0) cfg.set("model.n", std::to_string(cost_n));
            return cmd_cost(cfg, cost_model, cost_measure, cost_json);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
