#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "b2bplan/transfer.hpp"

namespace b2b {

struct EconomicParams {
    double lambda_pv = 0.1;    // $/kWh
    double lambda_c = 100.0;   // $/kVA
    double lambda_cm = 0.0;    // $/year
    double n_yr = 10.0;        // years
    double p1_limit = 0.8;     // fraction of NR_1 max that must be retained
    double p2_limit = 0.8;

    void validate() const;
};

/// Share of capital and maintenance cost carried by each feeder.
struct CostSplit {
    double gamma1 = 0.5;
    double gamma2 = 0.5;
};

struct NetRevenueCurve {
    std::vector<double> sizes_kva;
    std::vector<double> nr;
    std::vector<double> nr1;
    std::vector<double> nr2;
};

/// Backward differences of orders one to three.
///
/// With values v[0..n-1] on sizes S[0..n-1]:
///   d1[k] = v[k+1] - v[k]        belongs to size S[k+1]
///   d2[k] = d1[k+1] - d1[k]      belongs to size S[k+2]
///   d3[k] = d2[k+1] - d2[k]      belongs to size S[k+3]
///
/// `noise_floor` bounds the rounding carried into the differences by the
/// input values; gaps below it are treated as ties.
struct DerivativeSet {
    std::vector<double> d1;
    std::vector<double> d2;
    std::vector<double> d3;
    double noise_floor = 0.0;
};

struct ReturnAnalysis {
    std::vector<double> tor_years;    // +inf where the feeder saves nothing
    std::vector<double> vol_dollars;
    double ratio_vt = 1.0;
    std::vector<double> dvt;          // -inf where tor is +inf
    double best_size_kva = 0.0;       // argmax of dvt over finite entries
};

/// Candidate sizes collected from both feeders' curves.
///
/// `s_max1` / `s_max2` are the per-feeder revenue peaks; when present they
/// bound that feeder's own candidates (strictly below). When absent only the
/// combined `s_max` bounds candidates (inclusive).
struct SizeOptionTable {
    double s_min = 0.0;
    std::vector<double> opt_j1;
    std::vector<double> opt_j2;
    double opt_tor1 = 0.0;
    double opt_tor2 = 0.0;
    double s_max = 0.0;
    std::optional<double> s_max1;
    std::optional<double> s_max2;
};

enum class SelectionRule { all_below_min, min_of_maxes };

struct SizingDecision {
    double s_opt_kva = 0.0;
    SelectionRule rule_applied = SelectionRule::all_below_min;
    SizeOptionTable subset;  // opt_* lists hold survivors only
    bool tor1_survives = false;
    bool tor2_survives = false;
    std::vector<std::string> audit;
};

CostSplit cost_split(const SavingsCurve& curve);

NetRevenueCurve net_revenue_curves(const SavingsCurve& curve, const EconomicParams& econ, const CostSplit& split);

DerivativeSet discrete_derivatives(std::span<const double> values);

/// Grid size at the global maximum of `nr`, smallest size on ties.
double find_s_max(std::span<const double> nr, std::span<const double> sizes);

/// Sizes where the second or third difference has a strict local extremum
/// (beyond the noise floor), ascending and deduplicated.
std::vector<double> turning_points(const DerivativeSet& d, std::span<const double> sizes);

ReturnAnalysis return_analysis(std::span<const double> savings_kwh, std::span<const double> sizes,
                               const EconomicParams& econ);

/// Smallest size at or before the revenue peak with nr >= fraction * max.
/// Throws UneconomicError when the maximum is not positive.
double feeder_min_size(std::span<const double> nr, std::span<const double> sizes, double fraction,
                       int feeder_index);

struct MinSizes {
    double s_min1 = 0.0;
    double s_min2 = 0.0;
    double s_min = 0.0;  // max of the two
};

MinSizes min_sizes(const NetRevenueCurve& curve, const EconomicParams& econ);

SizingDecision select_optimal(const SizeOptionTable& table);

/// Everything the size-selection workflow derives from a savings curve.
struct SizingAnalysis {
    SavingsCurve savings;
    CostSplit split;
    NetRevenueCurve revenue;
    DerivativeSet deriv1;
    DerivativeSet deriv2;
    std::vector<double> turning1;
    std::vector<double> turning2;
    ReturnAnalysis return1;
    ReturnAnalysis return2;
    double s_max1 = 0.0;
    double s_max2 = 0.0;
    MinSizes mins;
    SizeOptionTable table;
    SizingDecision decision;
};

/// Full pipeline: cost split, revenue curves, differences, turning points,
/// return analysis, limits, option table and final selection.
SizingAnalysis analyze_sizing(const SavingsCurve& savings, const EconomicParams& econ);

std::string to_string(SelectionRule rule);

}  // namespace b2b
