#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "sgaze/cost.hpp"

using namespace sgaze;
using namespace testutil;

namespace {
// Loop-counting reference: literally count multiplies executed by a naive
// same-padding conv over the given dims (padding taps included like the
// shape-algebra convention counts them).
std::uint64_t count_conv_macs_by_loops(int c_in, int c_out, int k, int h, int w, bool depthwise) {
    std::uint64_t macs = 0;
    const int chans = depthwise ? c_in : c_in * c_out;
    for (int c = 0; c < chans; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int t = 0; t < k * k; ++t) ++macs;
    return macs;
}
}  // namespace

TEST_CASE("dense op counts match the worked examples", "[cost]") {
    ModelConfig cfg;
    cfg.n = 128;
    const auto oc = count_dense_ops(cfg);
    REQUIRE(oc.layers.size() == 9);
    CHECK(oc.layers[0].name == "conv1.dw");
    CHECK(oc.layers[0].macs == 470400);  // 2*49*4800
    CHECK(oc.layers[1].macs == 307200);  // 2*32*4800
    // LIF2: 64 state updates = 64 multiplies + 64 adds
    CHECK(oc.layers[7].name == "lif2");
    CHECK(oc.layers[7].state_updates == 64);
    CHECK(oc.layers[7].macs == 256 * 64);
    CHECK(oc.layers[7].comparisons == 64);
}

TEST_CASE("conv op counts are reproducible by loop counting", "[cost]") {
    ModelConfig cfg;
    cfg.n = 256;
    const auto oc = count_dense_ops(cfg);
    CHECK(oc.layers[0].macs == count_conv_macs_by_loops(2, 2, 7, 60, 80, true));
    CHECK(oc.layers[1].macs == count_conv_macs_by_loops(2, 32, 1, 60, 80, false));
    CHECK(oc.layers[2].macs == count_conv_macs_by_loops(32, 32, 5, 20, 26, true));
    CHECK(oc.layers[3].macs == count_conv_macs_by_loops(32, 128, 1, 20, 26, false));
    CHECK(oc.layers[4].macs == count_conv_macs_by_loops(128, 128, 5, 6, 8, true));
    CHECK(oc.layers[5].macs == count_conv_macs_by_loops(128, 256, 1, 6, 8, false));

    ModelConfig std_cfg;
    std_cfg.n = 128;
    std_cfg.use_dsc = false;
    const auto so = count_dense_ops(std_cfg);
    CHECK(so.layers[0].macs == count_conv_macs_by_loops(2, 32, 7, 60, 80, false));
    CHECK(so.layers[1].macs == count_conv_macs_by_loops(32, 128, 5, 20, 26, false));
    CHECK(so.layers[2].macs == count_conv_macs_by_loops(128, 128, 5, 6, 8, false));
}

TEST_CASE("totals equal the sum of layers", "[cost]") {
    ModelConfig cfg;
    cfg.n = 512;
    const auto oc = count_dense_ops(cfg);
    std::uint64_t macs = 0, adds = 0, cmps = 0, ups = 0;
    for (const auto& l : oc.layers) {
        macs += l.macs;
        adds += l.adds;
        cmps += l.comparisons;
        ups += l.state_updates;
    }
    CHECK(oc.total_macs() == macs);
    CHECK(oc.total_adds() == adds);
    CHECK(oc.total_comparisons() == cmps);
    CHECK(oc.total_state_updates() == ups);
    CHECK(oc.flops_mac2() == 2 * macs + adds + 2 * ups + cmps);
    CHECK(oc.flops_mac1() == macs + adds + ups + cmps);
}

TEST_CASE("sparse scaling: degenerate and linear cases", "[cost]") {
    ModelConfig cfg;
    cfg.n = 128;
    const auto dense = count_dense_ops(cfg);

    ActivityStats zero;
    zero.conv_in_occ.assign(6, 0.0);
    zero.flatten_occ = 0.0;
    zero.lif_rate = {0.0, 0.0, 0.0};
    zero.steps = 10;
    const auto s0 = count_sparse_ops(dense, zero, cfg);
    for (const auto& l : s0.layers) CHECK(l.macs == 0);
    CHECK(s0.total_state_updates() == dense.total_state_updates());
    CHECK(s0.total_adds() == dense.total_adds());

    ActivityStats one;
    one.conv_in_occ.assign(6, 1.0);
    one.flatten_occ = 1.0;
    one.lif_rate = {1.0, 1.0, 1.0};
    one.steps = 10;
    const auto s1 = count_sparse_ops(dense, one, cfg);
    CHECK(s1.total_macs() == dense.total_macs());
    CHECK(s1.flops_mac2() == dense.flops_mac2());

    ActivityStats quarter = one;
    quarter.lif_rate = {0.25, 1.0, 1.0};
    const auto sq = count_sparse_ops(dense, quarter, cfg);
    CHECK(sq.layers[7].macs == dense.layers[7].macs / 4);  // lif2 synapses x rate(lif1)
}

TEST_CASE("sparse never exceeds dense for random activities", "[cost]") {
    auto g = rng(61);
    std::uniform_real_distribution<double> u(0, 1);
    ModelConfig cfg;
    cfg.n = 256;
    const auto dense = count_dense_ops(cfg);
    for (int trial = 0; trial < 50; ++trial) {
        ActivityStats st;
        st.conv_in_occ = {u(g), u(g), u(g), u(g), u(g), u(g)};
        st.flatten_occ = u(g);
        st.lif_rate = {u(g), u(g), u(g)};
        st.steps = 1;
        const auto sp = count_sparse_ops(dense, st, cfg);
        for (size_t i = 0; i < sp.layers.size(); ++i) CHECK(sp.layers[i].macs <= dense.layers[i].macs);
        CHECK(sp.flops_mac2() <= dense.flops_mac2());
    }
}

TEST_CASE("power projection evaluates the stated formula", "[cost]") {
    EnergyModel em;  // 1.4 / 3.7 pJ
    const auto p = project_power(2'000'000, 500'000, em, 1000.0);
    CHECK(p.energy_uj == Catch::Approx(2.8 + 1.85).margin(1e-9));
    CHECK(p.power_mw == Catch::Approx(4.65).margin(1e-9));

    const auto z = project_power(0, 0, em, 1000.0);
    CHECK(z.energy_uj == 0.0);
    CHECK(z.power_mw == 0.0);
}

TEST_CASE("power scales linearly with frequency and coefficients", "[cost]") {
    EnergyModel em;
    const auto a = project_power(1'000'000, 200'000, em, 1000.0);
    const auto b = project_power(1'000'000, 200'000, em, 2000.0);
    CHECK(b.power_mw == Catch::Approx(2 * a.power_mw));
    EnergyModel em2 = em;
    em2.e_arith_pj *= 3;
    em2.e_mem_pj *= 3;
    const auto c = project_power(1'000'000, 200'000, em2, 1000.0);
    CHECK(c.power_mw == Catch::Approx(3 * a.power_mw));
}

TEST_CASE("latency projection", "[cost]") {
    CHECK(project_latency_ms(3, 1000.0) == 3.0);
    CHECK(project_latency_ms(3, 2000.0) == 1.5);
    CHECK(project_latency_ms(8, 1000.0) == 8.0);
    CHECK_THROWS_AS(project_latency_ms(3, 0.0), ConfigError);
    CHECK_THROWS_AS(project_latency_ms(3, -1.0), ConfigError);
}

TEST_CASE("cost report embeds convention and assumptions", "[cost]") {
    ModelConfig cfg;
    cfg.n = 128;
    auto net = Network<float>::build(cfg);
    EnergyModel em;
    const auto r = build_cost_report(net, em, 1000.0);
    CHECK(r.params == 107014);
    CHECK(!r.dense.convention.empty());
    CHECK(!r.assumptions.empty());
    CHECK(r.latency_ms == 3.0);
    bool mentions_policy = false;
    for (const auto& a : r.assumptions)
        if (a.find("load policy") != std::string::npos) mentions_policy = true;
    CHECK(mentions_policy);
}

TEST_CASE("load policies differ as documented", "[cost]") {
    ModelConfig cfg;
    cfg.n = 128;
    const auto oc = count_dense_ops(cfg);
    EnergyModel wf;
    wf.policy = EnergyModel::LoadPolicy::weight_fetch;
    EnergyModel so;
    so.policy = EnergyModel::LoadPolicy::state_only;
    CHECK(wf.loads(oc) == oc.total_macs() + oc.total_state_updates());
    CHECK(so.loads(oc) == 2 * oc.total_state_updates());
    CHECK(wf.loads(oc) > so.loads(oc));
}
