#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "moldiff/report_io.hpp"
#include "moldiff/run_config.hpp"

using namespace moldiff;

TEST(ParseQuantity, UnitSuffixesNormalizeToSi) {
    EXPECT_DOUBLE_EQ(parse_quantity("100um2/s", QuantityKind::diffusivity), 100e-12);
    EXPECT_DOUBLE_EQ(parse_quantity("0.5cm2/s", QuantityKind::diffusivity), 0.5e-4);
    EXPECT_DOUBLE_EQ(parse_quantity("3 mm2/s", QuantityKind::diffusivity), 3e-6);
    EXPECT_DOUBLE_EQ(parse_quantity("1e-9m2/s", QuantityKind::diffusivity), 1e-9);
    EXPECT_DOUBLE_EQ(parse_quantity("100um", QuantityKind::length), 100e-6);
    EXPECT_DOUBLE_EQ(parse_quantity("2m", QuantityKind::length), 2.0);
    EXPECT_DOUBLE_EQ(parse_quantity("5cm", QuantityKind::length), 0.05);
    EXPECT_DOUBLE_EQ(parse_quantity("7mm/s", QuantityKind::velocity), 7e-3);
    EXPECT_DOUBLE_EQ(parse_quantity("2.5e-3", QuantityKind::length), 2.5e-3);
}

TEST(ParseQuantity, RejectsUnknownUnitsAndJunk) {
    try {
        parse_quantity("3furlong", QuantityKind::length);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("um"), std::string::npos);
    }
    EXPECT_THROW(parse_quantity("2m", QuantityKind::diffusivity), ConfigError);
    EXPECT_THROW(parse_quantity("", QuantityKind::length), ConfigError);
    EXPECT_THROW(parse_quantity("abc", QuantityKind::length), ConfigError);
    EXPECT_THROW(parse_number("1.5x"), ConfigError);
}

TEST(Presets, KnownValuesAndErrorListsNames) {
    EXPECT_EQ(preset_channel("intracellular"), (ChannelParams{100e-12, 100e-6, 0.0}));
    EXPECT_EQ(preset_channel("interorganism"), (ChannelParams{0.5e-4, 2.0, 0.0}));
    try {
        preset_channel("ocean");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("intracellular"), std::string::npos);
        EXPECT_NE(msg.find("interorganism"), std::string::npos);
    }
}

TEST(RunConfig, ChannelNeedsExactlyOneSource) {
    RunConfig cfg;
    EXPECT_THROW(cfg.channel(), ConfigError);
    cfg.preset = "intracellular";
    EXPECT_EQ(cfg.channel(), preset_channel("intracellular"));
    cfg.distance = 1.0;
    EXPECT_THROW(cfg.channel(), ConfigError);
    cfg.preset.reset();
    EXPECT_THROW(cfg.channel(), ConfigError);
    cfg.diffusivity = 2.0;
    EXPECT_EQ(cfg.channel(), (ChannelParams{2.0, 1.0, 0.0}));
    cfg.drift_velocity = 0.25;
    EXPECT_EQ(cfg.channel().drift_velocity, 0.25);
    cfg.diffusivity = -1.0;
    EXPECT_THROW(cfg.channel(), ConfigError);
}

TEST(RunConfig, DerivedSettings) {
    RunConfig cfg;
    cfg.seed = 17;
    cfg.shards = 3;
    const auto wc = cfg.walk({1.0, 1.0, 0.0});
    EXPECT_EQ(wc.seed, 17u);
    EXPECT_EQ(wc.shards, 3u);
    EXPECT_TRUE(wc.bridge_correction);
    EXPECT_EQ(cfg.link_options().steps_per_slot, 10u);
    EXPECT_TRUE(cfg.link_options().fit_horizon);
    cfg.dt = 0.01;
    EXPECT_EQ(cfg.link_options().steps_per_slot, 0u);
    EXPECT_EQ(cfg.walk({1.0, 1.0, 0.0}).dt, 0.01);

    const auto mc = cfg.modulation(2.0);
    EXPECT_EQ(mc.bit_period, 2.0);
    EXPECT_EQ(mc.preamble, default_preamble());
    cfg.preamble = "10x";
    EXPECT_THROW(cfg.modulation(2.0), ConfigError);
    cfg.preamble = "1";
    cfg.alpha = 2.0;
    EXPECT_THROW(cfg.modulation(2.0), ConfigError);
}

TEST(RunConfig, ValidateRejectsNonsense) {
    RunConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.guard_multiplier = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.shards = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.bit_period = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.molecules_per_pulse = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ConfigJson, AppliesKeysWithUnits) {
    RunConfig cfg;
    apply_config_json(cfg, nlohmann::json::parse(R"({
        "diffusivity": "100um2/s", "distance": "50um", "drift": 0.001,
        "guard_mult": 4, "molecules": 250, "threshold": "calibrated",
        "seed": 9, "shards": 2, "bridge": false, "format": "json", "out_dir": "x"
    })"));
    EXPECT_DOUBLE_EQ(*cfg.diffusivity, 100e-12);
    EXPECT_DOUBLE_EQ(*cfg.distance, 50e-6);
    EXPECT_EQ(cfg.drift_velocity, 0.001);
    EXPECT_EQ(cfg.guard_multiplier, 4.0);
    EXPECT_EQ(cfg.molecules_per_pulse, 250u);
    EXPECT_EQ(cfg.threshold_policy, ThresholdPolicy::calibrated);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.shards, 2u);
    EXPECT_FALSE(cfg.bridge_correction);
    EXPECT_EQ(cfg.format, OutputFormat::json);
    EXPECT_EQ(cfg.output_dir, "x");
}

TEST(ConfigJson, RejectsUnknownKeysAndBadTypes) {
    RunConfig cfg;
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"sed": 1})")), ConfigError);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"seed": "one"})")), ConfigError);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse("[1]")), ConfigError);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"threshold": "adaptive"})")), ConfigError);
    EXPECT_THROW(load_config_file(cfg, "/nonexistent/moldiff.json"), ConfigError);
}

TEST(Bits, ParseAndFormat) {
    EXPECT_EQ(parse_bits("1010"), (Bits{1, 0, 1, 0}));
    EXPECT_EQ(bits_to_string(parse_bits("0110")), "0110");
    EXPECT_THROW(parse_bits(""), ConfigError);
    EXPECT_THROW(parse_bits("12"), ConfigError);
}

TEST(ReportIo, FloatFormattingIsStable) {
    EXPECT_EQ(format_float(0.1), "0.1");
    EXPECT_EQ(format_float(3166.405883850837), "3166.40588");
    EXPECT_EQ(format_float(1e-12), "1e-12");
    EXPECT_EQ(format_float(0.0), "0");
}

TEST(ReportIo, SlotAndSweepCsv) {
    std::ostringstream slots;
    const std::vector<std::uint64_t> counts = {5, 0, 7};
    write_slots_csv(slots, counts, 0.5);
    EXPECT_EQ(slots.str(), "slot_index,t_start_s,count\n0,0,5\n1,0.5,0\n2,1,7\n");

    std::ostringstream sweep;
    const std::vector<SweepRow> rows = {{0.25, 79.16, 0.125, 0.05, 20}};
    write_sweep_csv(sweep, rows);
    EXPECT_EQ(sweep.str(), "guard_multiplier,bit_period_s,mean_ber,std_ber,n_seeds\n0.25,79.16,0.125,0.05,20\n");
    EXPECT_EQ(sweep_to_json(rows)[0]["n_seeds"], 20);
}

TEST(ReportIo, LinkReportJsonCarriesConfigEcho) {
    LinkReport r;
    r.bits_sent = 16;
    r.channel = {1.0, 2.0, 0.0};
    r.walk.shards = 8;
    const auto j = to_json(r);
    EXPECT_EQ(j["bits_sent"], 16);
    EXPECT_TRUE(j.contains("capacity_method"));
    EXPECT_EQ(j["config"]["channel"]["distance_m"], 2.0);
    EXPECT_FALSE(j["config"]["walk"].contains("shards"));
    LinkReport other = r;
    other.walk.shards = 1;
    EXPECT_EQ(to_json(other).dump(2), j.dump(2));
}
