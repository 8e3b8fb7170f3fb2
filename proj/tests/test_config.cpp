#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pathhjb/config.hpp"

using namespace pathhjb;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST(ParseConfig, MinimalValidFillsDefaults) {
    const ParseOutcome out = parse_config(R"({"seed": 7, "model": {"family": "demo"}})");
    ASSERT_TRUE(out.ok()) << (out.errors.empty() ? "" : out.errors[0]);
    EXPECT_EQ(out.config.seed, 7u);
    EXPECT_EQ(out.config.model_family, "demo");
    EXPECT_EQ(out.config.paths, 2000);
    EXPECT_EQ(out.config.steps, 256);
    EXPECT_EQ(out.config.out_dir, "out");
}

TEST(ParseConfig, MissingSeedIsNamed) {
    const ParseOutcome out = parse_config(R"({"model": {"family": "demo"}})");
    ASSERT_EQ(out.errors.size(), 1u);
    EXPECT_NE(out.errors[0].find("seed"), std::string::npos);
}

TEST(ParseConfig, AggregatesAllViolations) {
    const ParseOutcome out =
        parse_config(R"({"paths": -3, "model": {"family": "unknown-family"}})");
    // Missing seed, bad budget, unknown family: all reported in one pass.
    EXPECT_GE(out.errors.size(), 3u);
}

TEST(ParseConfig, UnknownKeyAndSyntaxError) {
    {
        const ParseOutcome out = parse_config(R"({"seed": 1, "wat": 2})");
        ASSERT_EQ(out.errors.size(), 1u);
        EXPECT_NE(out.errors[0].find("unknown key: wat"), std::string::npos);
    }
    {
        const ParseOutcome out = parse_config("{\n  \"seed\": 1,\n  oops\n}");
        ASSERT_EQ(out.errors.size(), 1u);
        EXPECT_NE(out.errors[0].find("line 3"), std::string::npos);
    }
    {
        const ParseOutcome out = parse_config(R"({"seed": 1, "checks": ["not-a-check"]})");
        ASSERT_EQ(out.errors.size(), 1u);
        EXPECT_NE(out.errors[0].find("unknown check id"), std::string::npos);
    }
}

TEST(SpecDigest, StableAndDiscriminating) {
    const std::string a = spec_digest("demo", 0);
    EXPECT_EQ(a.size(), 16u);
    EXPECT_EQ(a, spec_digest("demo", 0));
    EXPECT_NE(a, spec_digest("demo", 1));
    EXPECT_NE(a, spec_digest("lsmc-tree", 0));
}

TEST(Dispatch, TreeValueRunAndResourceGuard) {
    RunConfig c;
    c.subcommand = "value-tree";
    c.model_family = "lsmc-tree";
    c.seed = 3;
    c.seed_set = true;
    c.depth = 4;
    c.out_dir = "cfg_test_out/tree";
    EXPECT_EQ(dispatch(c), 0);
    EXPECT_TRUE(std::filesystem::exists(c.out_dir + "/value_tree.json"));
    // Node-cap violation: exit code 2 and no partial surface output.
    RunConfig big = c;
    big.out_dir = "cfg_test_out/tree_big";
    big.depth = 24;
    big.node_cap = 1 << 10;
    EXPECT_EQ(dispatch(big), 2);
    EXPECT_FALSE(std::filesystem::exists(big.out_dir + "/value_tree.json"));
}

TEST(Dispatch, VerifyWritesReportAndSignalsFailure) {
    RunConfig c;
    c.subcommand = "verify-run";
    c.model_family = "demo";
    c.seed = 11;
    c.seed_set = true;
    c.paths = 200;
    c.steps = 64;
    c.lsmc_paths = 3000;
    c.checks = {"lemma-3.1-i-flow", "a1-lipschitz-audit"};
    c.out_dir = "cfg_test_out/verify";
    EXPECT_EQ(dispatch(c), 0);
    EXPECT_TRUE(std::filesystem::exists(c.out_dir + "/report.json"));
    EXPECT_TRUE(std::filesystem::exists(c.out_dir + "/meta.json"));
    // The understated-L family fails its audit with exit code 4.
    RunConfig bad = c;
    bad.model_family = "faulty-lipschitz";
    bad.checks = {"a1-lipschitz-audit"};
    bad.out_dir = "cfg_test_out/verify_bad";
    EXPECT_EQ(dispatch(bad), 4);
    const std::string report = slurp(bad.out_dir + "/report.json");
    EXPECT_NE(report.find("\"pass\": false"), std::string::npos);
}

TEST(Dispatch, ByteIdenticalRerunsAtAnyWorkerCount) {
    RunConfig c;
    c.subcommand = "verify-run";
    c.model_family = "demo";
    c.seed = 12;
    c.seed_set = true;
    c.paths = 200;
    c.steps = 64;
    c.checks = {"lemma-3.1-ii-growth", "lemma-2.1-classical"};
    c.out_dir = "cfg_test_out/repro1";
    c.workers = 1;
    EXPECT_EQ(dispatch(c), 0);
    RunConfig c2 = c;
    c2.out_dir = "cfg_test_out/repro2";
    c2.workers = 4;
    EXPECT_EQ(dispatch(c2), 0);
    EXPECT_EQ(slurp(c.out_dir + "/report.json"), slurp(c2.out_dir + "/report.json"));
    // Simulation artifacts too.
    RunConfig s = c;
    s.subcommand = "simulate";
    s.paths = 32;
    s.export_paths = 2;
    s.holder_k = 2.0;
    s.out_dir = "cfg_test_out/sim1";
    s.workers = 1;
    EXPECT_EQ(dispatch(s), 0);
    RunConfig s2 = s;
    s2.out_dir = "cfg_test_out/sim2";
    s2.workers = 3;
    EXPECT_EQ(dispatch(s2), 0);
    EXPECT_EQ(slurp(s.out_dir + "/simulate.json"), slurp(s2.out_dir + "/simulate.json"));
    EXPECT_EQ(slurp(s.out_dir + "/path_0.csv"), slurp(s2.out_dir + "/path_0.csv"));
}

TEST(Dispatch, LsmcAndOracleAndCrosscheck) {
    RunConfig c;
    c.model_family = "lsmc-tree";
    c.seed = 21;
    c.seed_set = true;
    c.subcommand = "value-lsmc";
    c.lsmc_paths = 2000;
    c.lsmc_steps = 8;
    c.snapshots = {0.5};
    c.noise = "rademacher";
    c.out_dir = "cfg_test_out/lsmc";
    EXPECT_EQ(dispatch(c), 0);
    EXPECT_TRUE(std::filesystem::exists(c.out_dir + "/value_lsmc.json"));
    RunConfig o = c;
    o.subcommand = "value-oracle";
    o.depth = 3;
    o.out_dir = "cfg_test_out/oracle";
    EXPECT_EQ(dispatch(o), 0);
    EXPECT_TRUE(std::filesystem::exists(o.out_dir + "/value_oracle.json"));
    RunConfig x;
    x.model_family = "demo";
    x.seed = 22;
    x.seed_set = true;
    x.subcommand = "fields-crosscheck";
    x.out_dir = "cfg_test_out/crosscheck";
    EXPECT_EQ(dispatch(x), 0);
    EXPECT_TRUE(std::filesystem::exists(x.out_dir + "/crosscheck.json"));
}
