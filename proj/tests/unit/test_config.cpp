#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "b2bplan/config.hpp"
#include "b2bplan/error.hpp"

namespace b2b {
namespace {

class SeedEnv {
public:
    explicit SeedEnv(const char* value) {
        if (value) {
            ::setenv("B2BPLAN_SEED", value, 1);
        } else {
            ::unsetenv("B2BPLAN_SEED");
        }
    }
    ~SeedEnv() { ::unsetenv("B2BPLAN_SEED"); }
};

TEST(Config, EmptyObjectKeepsDefaults) {
    const auto c = parse_config_json("{}");
    const PlanConfig d;
    EXPECT_EQ(c.economics.lambda_pv, d.economics.lambda_pv);
    EXPECT_EQ(c.economics.lambda_c, d.economics.lambda_c);
    EXPECT_EQ(c.efficiency, 1.0);
    EXPECT_EQ(c.savings_rule, SavingsRule::clamped);
    EXPECT_EQ(c.size_grid.points(), d.size_grid.points());
    EXPECT_EQ(c.seed, 2024u);
    EXPECT_EQ(c.threads, 1u);
    EXPECT_FALSE(c.siting.r_explicit.has_value());
}

TEST(Config, EveryKeyIsRead) {
    const auto c = parse_config_json(R"({
        "schema_version": 1,
        "economics": {"lambda_pv": 0.2, "lambda_c": 150, "lambda_cm": 500, "n_yr": 20,
                      "p1_limit": 0.7, "p2_limit": 0.9},
        "converter": {"efficiency": 0.97, "size_grid": {"min_kva": 100, "max_kva": 1000, "step_kva": 100},
                      "cap_savings_by_curtailment": true},
        "backfeed_limits": {"feeder1_kw": 30, "feeder2_kw": 40},
        "siting": {"alpha": 0.25, "beta": 0.75, "der_buses": [3, 5], "excluded_buses": [2],
                   "r": 0.125, "delta_p_kw": 2, "delta_q_kvar": 3},
        "pairing": {"reference_size_kva": 400, "seed": 99},
        "threads": 4
    })");
    EXPECT_EQ(c.economics.lambda_pv, 0.2);
    EXPECT_EQ(c.economics.lambda_c, 150.0);
    EXPECT_EQ(c.economics.lambda_cm, 500.0);
    EXPECT_EQ(c.economics.n_yr, 20.0);
    EXPECT_EQ(c.economics.p1_limit, 0.7);
    EXPECT_EQ(c.economics.p2_limit, 0.9);
    EXPECT_EQ(c.efficiency, 0.97);
    EXPECT_EQ(c.size_grid.points().size(), 10u);
    EXPECT_EQ(c.savings_rule, SavingsRule::curtailment_capped);
    EXPECT_EQ(c.feeder1_backfeed_kw, 30.0);
    EXPECT_EQ(c.feeder2_backfeed_kw, 40.0);
    EXPECT_EQ(c.siting.alpha, 0.25);
    EXPECT_EQ(c.siting.der_buses, (std::vector<int>{3, 5}));
    EXPECT_EQ(c.siting.excluded_buses, (std::vector<int>{2}));
    EXPECT_EQ(c.siting.r_explicit, 0.125);
    EXPECT_EQ(c.vlsm.delta_p_kw, 2.0);
    EXPECT_EQ(c.vlsm.delta_q_kvar, 3.0);
    EXPECT_EQ(c.reference_size_kva, 400.0);
    EXPECT_EQ(c.seed, 99u);
    EXPECT_EQ(c.threads, 4u);

    const auto s = study_config(c);
    EXPECT_EQ(s.seed, 99u);
    EXPECT_EQ(s.reference_size_kva, 400.0);
    EXPECT_EQ(s.efficiency, 0.97);
    EXPECT_EQ(s.threads, 4u);
}

TEST(Config, RAutoLeavesItUnset) {
    const auto c = parse_config_json(R"({"siting": {"r": "auto"}})");
    EXPECT_FALSE(c.siting.r_explicit.has_value());
    EXPECT_THROW(parse_config_json(R"({"siting": {"r": "big"}})"), ParseError);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_config_json("{"), ParseError);
    EXPECT_THROW(parse_config_json(R"({"schema_version": 2})"), ParseError);
    EXPECT_THROW(parse_config_json(R"({"economics": {"lambda_pv": "cheap"}})"), ParseError);
    EXPECT_THROW(parse_config_json(R"({"converter": {"efficiency": 0}})"), ParseError);
    EXPECT_THROW(parse_config_json(R"({"converter": {"efficiency": 1.1}})"), ParseError);
    EXPECT_THROW(parse_config_json(R"({"converter": {"size_grid": {"min_kva": 100, "max_kva": 200, "step_kva": 50}}})"),
                 ParseError);
    EXPECT_THROW(parse_config_json(R"({"backfeed_limits": {"feeder1_kw": -1}})"), ParseError);
    EXPECT_THROW(parse_config_json(R"({"economics": {"p1_limit": 1.5}})"), ParseError);
    EXPECT_THROW(load_config_json("/nonexistent/plan.json"), ParseError);
}

TEST(Config, ShippedCaseFileLoads) {
    const auto c = load_config_json(std::filesystem::path(B2BPLAN_DATA_DIR) / "configs" / "case1.json");
    EXPECT_EQ(c.size_grid.min_kva, 200.0);
    EXPECT_EQ(c.size_grid.max_kva, 1500.0);
    EXPECT_EQ(c.economics.p1_limit, 0.8);
}

TEST(Config, SeedOverride) {
    PlanConfig c;
    {
        SeedEnv env(nullptr);
        apply_seed_override(c);
        EXPECT_EQ(c.seed, 2024u);
    }
    {
        SeedEnv env("");
        apply_seed_override(c);
        EXPECT_EQ(c.seed, 2024u);
    }
    {
        SeedEnv env("18446744073709551615");
        apply_seed_override(c);
        EXPECT_EQ(c.seed, 18446744073709551615ull);
    }
    for (const char* bad : {"-1", "12x", "x", "1e3", " 5"}) {
        SeedEnv env(bad);
        EXPECT_THROW(apply_seed_override(c), ParseError) << bad;
    }
}

}  // namespace
}  // namespace b2b
