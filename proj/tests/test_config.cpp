#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "sgaze/config.hpp"

using namespace sgaze;

TEST_CASE("defaults resolve into valid typed configs", "[config]") {
    RunConfig cfg;
    CHECK(cfg.model().n == 128);
    CHECK(cfg.train().lr == 0.001);
    CHECK(cfg.train().window_ms == 450);
    CHECK(cfg.augment().p_hflip == 0.5);
    CHECK(cfg.scene().session_ms == 5000);
    CHECK(cfg.energy().e_arith_pj == 1.4);
}

TEST_CASE("unknown keys are rejected with the valid list", "[config]") {
    RunConfig cfg;
    try {
        cfg.set("model.nonsense", "1");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("model.nonsense") != std::string::npos);
        CHECK(msg.find("model.n") != std::string::npos);  // lists valid keys
    }
}

TEST_CASE("file parsing with comments and overrides", "[config]") {
    const auto path = std::filesystem::temp_directory_path() / "cfg_t.txt";
    {
        std::ofstream out(path);
        out << "# comment\n";
        out << "model.n = 256\n";
        out << "train.lr = 0.01   # trailing comment\n";
        out << "\n";
    }
    RunConfig cfg;
    cfg.load_file(path.string());
    CHECK(cfg.model().n == 256);
    CHECK(cfg.train().lr == 0.01);
    cfg.set_pair("model.n=512");  // CLI override wins
    CHECK(cfg.model().n == 512);
}

TEST_CASE("serialized config reloads identically", "[config]") {
    RunConfig cfg;
    cfg.set("model.n", "256");
    cfg.set("scene.seed", "99");
    const auto path = std::filesystem::temp_directory_path() / "cfg_rt.txt";
    cfg.write_file(path.string());
    RunConfig back;
    back.load_file(path.string());
    CHECK(back.serialize() == cfg.serialize());
}

TEST_CASE("malformed values fail with the key name", "[config]") {
    RunConfig cfg;
    cfg.set("train.lr", "fast");
    CHECK_THROWS_AS(cfg.train(), ConfigError);
    cfg = RunConfig();
    cfg.set("train.loss", "weird");
    CHECK_THROWS_AS(cfg.train(), ConfigError);
    cfg = RunConfig();
    cfg.set("energy.load_policy", "guess");
    CHECK_THROWS_AS(cfg.energy(), ConfigError);
}

TEST_CASE("numeric output is locale-independent", "[config]") {
    RunConfig cfg;
    const std::string s = cfg.serialize();
    CHECK(s.find(',') == std::string::npos);  // no locale group/decimal commas
}
