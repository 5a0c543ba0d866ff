#include <doctest.h>

#include "dst/config.hpp"
#include "dst/error.hpp"

using namespace dst;

TEST_CASE("config round-trips through serialization") {
    ExperimentConfig cfg;
    cfg.dataset = DatasetKind::synthetic_blobs;
    cfg.arch = {16, 32, 4};
    cfg.global_sparsity = 0.87;
    cfg.policy = GrowthPolicy::Kind::gradient;
    cfg.c = 0.30000000000000004; // must survive full-precision printing
    cfg.drop_schedule = DropSchedule::Mode::constant;
    cfg.delta_t = 50;
    cfg.t_end = 2000;
    cfg.total_iterations = 2500;
    cfg.seed = 123456789012345ull;
    cfg.label = "roundtrip";
    const ExperimentConfig back = parse_config_text(serialize_config(cfg));
    CHECK(back == cfg);
}

TEST_CASE("defaults round-trip too") {
    const ExperimentConfig cfg;
    CHECK(parse_config_text(serialize_config(cfg)) == cfg);
}

TEST_CASE("comments, blank lines and whitespace are tolerated") {
    const std::string text =
        "# a comment\n"
        "\n"
        "  policy =   dst_ee   # trailing comment\n"
        "c= 1.5\n";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.policy == GrowthPolicy::Kind::acquisition_ee);
    CHECK(cfg.c == 1.5);
}

TEST_CASE("bad input is rejected with config errors") {
    CHECK_THROWS_AS(parse_config_text("nonsense_key = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("c = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("policy = alpha_beta\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("just a line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("batch_size = 1.5\n"), ConfigError);
}

TEST_CASE("overrides change exactly the named key") {
    ExperimentConfig cfg;
    const ExperimentConfig before = cfg;
    apply_override(cfg, "global_sparsity", "0.95");
    CHECK(cfg.global_sparsity == 0.95);
    apply_override(cfg, "global_sparsity", "0.9");
    CHECK(cfg == before);
}

TEST_CASE("repeat_seeds round-trips, empty and populated") {
    ExperimentConfig cfg;
    CHECK(parse_config_text(serialize_config(cfg)).repeat_seeds.empty());
    cfg.repeat_seeds = {3, 14, 159};
    CHECK(parse_config_text(serialize_config(cfg)) == cfg);
    const ExperimentConfig parsed = parse_config_text("repeat_seeds = 5, 6 ,7\n");
    CHECK(parsed.repeat_seeds == std::vector<std::uint64_t>{5, 6, 7});
}

TEST_CASE("config hash tracks content") {
    ExperimentConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 99;
    CHECK(config_hash(a) != config_hash(b));
}
