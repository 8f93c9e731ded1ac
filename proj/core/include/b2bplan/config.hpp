#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "b2bplan/network.hpp"
#include "b2bplan/pairing.hpp"
#include "b2bplan/siting.hpp"
#include "b2bplan/sizing.hpp"
#include "b2bplan/transfer.hpp"

namespace b2b {

inline constexpr int kSchemaVersion = 1;

/// Every tunable of the three workflows. Missing JSON keys keep these defaults.
struct PlanConfig {
    EconomicParams economics;
    double efficiency = 1.0;
    SizeGridSpec size_grid;
    SavingsRule savings_rule = SavingsRule::clamped;
    double feeder1_backfeed_kw = 0.0;
    double feeder2_backfeed_kw = 0.0;
    SitingConfig siting;
    VlsmOptions vlsm;
    double reference_size_kva = 500.0;
    std::uint64_t seed = 2024;
    unsigned threads = 1;

    void validate() const;
};

PlanConfig parse_config_json(const std::string& text);
PlanConfig load_config_json(const std::filesystem::path& path);

/// Applies B2BPLAN_SEED when it is set to a valid unsigned integer.
void apply_seed_override(PlanConfig& cfg);

StudyConfig study_config(const PlanConfig& cfg);

}  // namespace b2b
