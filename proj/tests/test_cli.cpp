#include <gtest/gtest.h>

#include "ggiwt/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ggiwt;
using namespace ggiwt::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        std::random_device rd;
        dir = fs::temp_directory_path() / ("ggiwt_cli_" + std::to_string(rd()));
        fs::create_directories(dir);
        unsetenv(kOutDirEnv);
    }
    void TearDown() override {
        unsetenv(kOutDirEnv);
        fs::remove_all(dir);
    }

    fs::path write_json(const std::string& name, const nlohmann::json& j) {
        const fs::path p = dir / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    /// A short configuration so runs finish quickly.
    nlohmann::json short_config(int scans = 6) {
        nlohmann::json j = to_json(default_config(1));
        j["scenario"]["num_scans"] = scans;
        return j;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

}  // namespace

TEST_F(CliTest, ValidateDefaultConfig) {
    const auto p = write_json("default.json", to_json(default_config(1)));
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(p.string(), out, err), 0);
    EXPECT_TRUE(err.str().empty());
    EXPECT_EQ(nlohmann::json::parse(out.str()), to_json(default_config(1)));
}

TEST_F(CliTest, ValidateReportsEveryViolation) {
    nlohmann::json j = to_json(default_config(1));
    j["motion"]["eta"] = 0.5;
    j["filter"]["prune_T"] = -1.0;
    const auto p = write_json("bad.json", j);
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(p.string(), out, err), 1);
    EXPECT_NE(err.str().find("eta"), std::string::npos);
    EXPECT_NE(err.str().find("prune"), std::string::npos);
}

TEST_F(CliTest, ValidateMissingFile) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate((dir / "missing.json").string(), out, err), 1);
}

TEST_F(CliTest, UnknownScenarioIsConfigError) {
    RunFlags flags;
    flags.scenario = 3;
    flags.out = (dir / "out").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(flags, out, err), 1);
    EXPECT_NE(err.str().find("unknown scenario"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST_F(CliTest, UnknownFilterAndZeroRuns) {
    RunFlags flags;
    flags.filters = "kalman";
    flags.runs = 0;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(flags, out, err), 1);
    EXPECT_NE(err.str().find("kalman"), std::string::npos);
    EXPECT_NE(err.str().find("runs must be at least 1"), std::string::npos);
}

TEST_F(CliTest, RunWritesAllOutputs) {
    RunFlags flags;
    flags.config_path = write_json("short.json", short_config()).string();
    flags.runs = 2;
    flags.out = (dir / "out").string();
    flags.threads = 1;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(flags, out, err), 0) << err.str();
    for (const char* f : {"metrics.csv", "cardinality.csv", "trajectories.jsonl", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;

    std::ifstream card(dir / "out" / "cardinality.csv");
    std::string header;
    std::getline(card, header);
    EXPECT_EQ(header, "scan,filter,mean_card,true_card");

    std::ifstream traj(dir / "out" / "trajectories.jsonl");
    for (std::string line; std::getline(traj, line);) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("filter"));
        EXPECT_EQ(j["states"].size(), j["extents"].size());
    }
}

TEST_F(CliTest, MetricsCsvRoundTripsExactly) {
    ExperimentConfig cfg = default_config(2);
    cfg.scenario.num_scans = 5;
    const MonteCarloResult mc = monte_carlo(cfg, FilterSelection{}, 2, 3, 1);
    std::stringstream ss;
    write_metrics_csv(ss, mc);
    const auto back = read_metrics_csv(ss);
    ASSERT_EQ(back.size(), mc.filters.size());
    for (const auto& name : mc.filters) {
        const MetricReport& a = mc.aggregate.at(name);
        const MetricReport& b = back.at(name);
        EXPECT_EQ(a.total, b.total);
        EXPECT_EQ(a.c_l, b.c_l);
        EXPECT_EQ(a.c_m, b.c_m);
        EXPECT_EQ(a.c_f, b.c_f);
        EXPECT_EQ(a.c_t, b.c_t);
    }
}

TEST_F(CliTest, RerunIsByteIdentical) {
    RunFlags flags;
    flags.config_path = write_json("short.json", short_config()).string();
    flags.runs = 2;
    flags.threads = 1;
    std::ostringstream out, err;
    flags.out = (dir / "a").string();
    ASSERT_EQ(cmd_run(flags, out, err), 0);
    flags.out = (dir / "b").string();
    ASSERT_EQ(cmd_run(flags, out, err), 0);
    for (const char* f : {"metrics.csv", "cardinality.csv", "trajectories.jsonl"})
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST_F(CliTest, OutputDirectoryPrecedence) {
    RunFlags flags;
    flags.config_path = write_json("short.json", short_config(3)).string();
    flags.runs = 1;
    flags.filters = "baseline";
    EXPECT_EQ(resolve_manifest(flags).out, kDefaultOutDir);

    setenv(kOutDirEnv, (dir / "env").c_str(), 1);
    EXPECT_EQ(resolve_manifest(flags).out, (dir / "env").string());
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(flags, out, err), 0) << err.str();
    EXPECT_TRUE(fs::exists(dir / "env" / "metrics.csv"));

    flags.out = (dir / "flag").string();
    EXPECT_EQ(resolve_manifest(flags).out, (dir / "flag").string());
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
    nlohmann::json j = short_config();
    j["run"] = {{"runs", 7}, {"seed", 9}, {"filters", "trajectory"}};
    RunFlags flags;
    flags.config_path = write_json("c.json", j).string();
    RunManifest m = resolve_manifest(flags);
    EXPECT_EQ(m.runs, 7);
    EXPECT_EQ(m.seed, 9u);
    EXPECT_EQ(m.filters, "trajectory");
    flags.runs = 3;
    flags.scenario = 2;
    m = resolve_manifest(flags);
    EXPECT_EQ(m.runs, 3);
    EXPECT_EQ(m.config.scenario.id, 2);
    EXPECT_EQ(m.config.scenario.num_scans, 6);
}

TEST_F(CliTest, ManifestReproducesRun) {
    RunFlags flags;
    flags.config_path = write_json("short.json", short_config()).string();
    flags.runs = 2;
    flags.seed = 5;
    flags.out = (dir / "first").string();
    flags.threads = 1;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(flags, out, err), 0);

    RunFlags again;
    again.config_path = (dir / "first" / "manifest.json").string();
    again.out = (dir / "second").string();
    again.threads = 1;
    ASSERT_EQ(cmd_run(again, out, err), 0) << err.str();
    EXPECT_EQ(slurp(dir / "first" / "metrics.csv"), slurp(dir / "second" / "metrics.csv"));
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "second" / "manifest.json"))["run"]["seed"], 5);
}

TEST(FormatDouble, RoundTrips) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 20 - 10);
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    }
}
