#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "b2bplan/profiles.hpp"
#include "b2bplan/transfer.hpp"

namespace b2b {

struct NamedProfile {
    std::string label;
    FeederProfile profile;
};

struct PairScore {
    std::pair<std::string, std::string> pair_id;
    double std_sum_kw = 0.0;
    std::optional<double> annual_savings_kwh;
    double pratio = 0.0;
};

/// Sum of the population standard deviations of the two feeders' load series.
/// DER is not part of the score.
double std_criterion(const FeederProfile& p1, const FeederProfile& p2);

/// Scores every unordered pair (a, b) with label(a) < label(b), sorts by
/// descending score with ties broken by pair label, and keeps the top `top_k`.
/// The pair's pratio is peak(a) / peak(b).
std::vector<PairScore> rank_pairs(std::span<const NamedProfile> candidates, std::size_t top_k);

enum class StudyArea { comm_comm, res_res, comm_high_res, res_high_comm };

inline constexpr std::array<StudyArea, 4> kStudyAreas = {StudyArea::comm_comm, StudyArea::res_res,
                                                         StudyArea::comm_high_res, StudyArea::res_high_comm};
inline constexpr std::array<double, 6> kStudyRatios = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};

struct PairScenario {
    StudyArea area = StudyArea::comm_comm;
    double pratio = 0.0;  // lower peak / higher peak
    LoadClass low_kind = LoadClass::commercial;
    LoadClass high_kind = LoadClass::commercial;
};

/// The 24 scenarios: 4 areas, each sweeping the peak ratio 0.3 to 0.8.
std::vector<PairScenario> scenario_grid();

struct StudyConfig {
    double high_peak_kw = 1000.0;
    /// PV nameplate as a fraction of each feeder's own peak load.
    double pv_penetration = 1.2;
    int days = 365;
    double step_hours = 0.5;
    std::uint64_t seed = 2024;
    double reference_size_kva = 500.0;
    double efficiency = 1.0;
    double backfeed_limit_kw = 0.0;
    unsigned threads = 1;
};

struct StudyRow {
    PairScenario scenario;
    double std_sum_kw = 0.0;
    double annual_savings_kwh = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::optional<double> spearman_rho;  // empty when a column is constant
};

StudyResult scenario_grid_study(const StudyConfig& cfg);

/// Spearman rank correlation with average ranks for ties; empty when either
/// column has zero rank variance.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

std::string to_string(StudyArea area);

}  // namespace b2b
