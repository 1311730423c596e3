#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with the given arguments; stderr is folded into out.
Result run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" MOLDIFF_CLI_PATH "\" " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::current_path() / "cli_scratch" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Cli, SendWritesReportAndSlots) {
    const auto dir = scratch("send");
    const auto r = run("send --text HELLO --preset interorganism --guard-mult 10 --seed 7 --out-dir " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("recovered: HELLO"), std::string::npos) << r.out;
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_TRUE(report.contains("ber"));
    EXPECT_TRUE(report.contains("capacity_estimate_bps"));
    EXPECT_EQ(report["seed"], 7);
    EXPECT_EQ(report["bits_sent"], 48);
    EXPECT_EQ(slurp(dir / "slots.csv").rfind("slot_index,t_start_s,count\n", 0), 0u);
}

TEST(Cli, SendJsonFormat) {
    const auto dir = scratch("send_json");
    const auto r = run("send --text A --preset intracellular --molecules 100 --format json --out-dir " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "slots.json")).is_array());
    EXPECT_FALSE(fs::exists(dir / "slots.csv"));
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("send --preset intracellular").code, 2);
    const auto bad = run("send --text HI --preset ocean");
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.out.find("intracellular"), std::string::npos);
    EXPECT_NE(bad.out.find("interorganism"), std::string::npos);
    EXPECT_EQ(run("send --text HI").code, 2);
    EXPECT_EQ(run("send --text HI --preset intracellular --distance 2m").code, 2);
    EXPECT_EQ(run("send --text HI --diffusivity 1furlong2/s --distance 1m").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("capture-time"), std::string::npos);
    EXPECT_EQ(run("send --help").code, 0);
}

TEST(Cli, CaptureTimeMatchesMonteCarlo) {
    const auto r = run("capture-time --preset intracellular --p 0.9 --particles 20000 --seed 3");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("configured,1e-10,0.0001,0.9,3166.40588,"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find(",yes\n"), std::string::npos) << r.out;
    EXPECT_EQ(run("capture-time --preset intracellular --p 0.9 --particles 20000 --seed 3").out, r.out);
}

TEST(Cli, CaptureTimeRegimeTableAndErrors) {
    const auto r = run("capture-time --preset intracellular --particles 2000 --regime-table");
    ASSERT_EQ(r.code, 0) << r.out;
    std::size_t lines = 0;
    for (char c : r.out) lines += c == '\n';
    EXPECT_EQ(lines, 1u + 1u + 8u);
    EXPECT_EQ(run("capture-time --diffusivity 1 --distance 0").code, 2);
    EXPECT_EQ(run("capture-time --preset intracellular --p 1.5").code, 2);
    EXPECT_FALSE(fs::exists(fs::current_path() / "capture_time.csv"));
    const auto dir = scratch("capture");
    ASSERT_EQ(run("capture-time --preset intracellular --particles 2000 --out-dir " + dir.string()).code, 0);
    EXPECT_TRUE(fs::exists(dir / "capture_time.csv"));
}

TEST(Cli, SweepSingleRowAndMalformedList) {
    const auto dir = scratch("sweep");
    const auto r = run("sweep --text HI --preset intracellular --molecules 50 --multipliers 2 --seeds 3 --out-dir " +
                       dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    const std::string csv = slurp(dir / "sweep.csv");
    EXPECT_EQ(csv, r.out);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    EXPECT_EQ(lines, 2u);
    EXPECT_EQ(csv.rfind("guard_multiplier,bit_period_s,mean_ber,std_ber,n_seeds\n2,", 0), 0u);
    EXPECT_EQ(run("sweep --text HI --preset intracellular --multipliers 1,,2").code, 2);
    EXPECT_EQ(run("sweep --text HI --preset intracellular --multipliers 1,x").code, 2);
    EXPECT_EQ(run("sweep --text HI --preset intracellular --multipliers 0").code, 2);
}

TEST(Cli, RateExamples) {
    const auto a = run("rate 20e6 5");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, "100000000 bits/s\n");
    EXPECT_EQ(run("rate 1 0.3").out, "0.3 bits/s\n");
    EXPECT_EQ(run("rate 0 4").out, "0 bits/s\n");
    EXPECT_EQ(run("rate -- -1 2").code, 2);
    EXPECT_EQ(run("rate abc 2").code, 2);
}

TEST(Cli, SeedFromEnvironmentAndFlagPrecedence) {
    const auto a = scratch("env_a");
    const auto b = scratch("env_b");
    ASSERT_EQ(run("send --text Z --preset intracellular --molecules 5 --out-dir " + a.string(), "MOLDIFF_SEED=44").code,
              0);
    ASSERT_EQ(run("send --text Z --preset intracellular --molecules 5 --seed 44 --out-dir " + b.string()).code, 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(a / "report.json"))["seed"], 44);
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    const auto c = scratch("env_c");
    ASSERT_EQ(run("send --text Z --preset intracellular --molecules 5 --seed 9 --out-dir " + c.string(),
                  "MOLDIFF_SEED=44")
                  .code,
              0);
    EXPECT_EQ(nlohmann::json::parse(slurp(c / "report.json"))["seed"], 9);
    EXPECT_EQ(run("send --text Z --preset intracellular", "MOLDIFF_SEED=notanumber").code, 2);
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
    const auto dir = scratch("config");
    {
        std::ofstream cfg(dir / "run.json");
        cfg << R"({"diffusivity": "100um2/s", "distance": "100um", "molecules": 10, "seed": 5})";
    }
    const auto out = dir / "out";
    ASSERT_EQ(run("send --text Q --config " + (dir / "run.json").string() + " --seed 6 --out-dir " + out.string()).code,
              0);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    EXPECT_EQ(report["seed"], 6);
    EXPECT_EQ(report["config"]["modulation"]["molecules_per_pulse"], 10);
    EXPECT_EQ(report["config"]["channel"]["distance_m"], 100e-6);
    {
        std::ofstream bad(dir / "bad.json");
        bad << R"({"colour": 3})";
    }
    EXPECT_EQ(run("send --text Q --config " + (dir / "bad.json").string()).code, 2);
}

TEST(Cli, OutputsAreByteStableAcrossRunsAndShards) {
    const auto a = scratch("stable_a");
    const auto b = scratch("stable_b");
    const std::string args = "send --text OK --preset intracellular --molecules 200 --seed 12 --out-dir ";
    ASSERT_EQ(run(args + a.string()).code, 0);
    ASSERT_EQ(run(args + b.string() + " --shards 4").code, 0);
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    EXPECT_EQ(slurp(a / "slots.csv"), slurp(b / "slots.csv"));
}
