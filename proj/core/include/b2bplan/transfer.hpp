#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "b2bplan/profiles.hpp"

namespace b2b {

struct ConverterSpec {
    double size_kva = 0.0;
    double efficiency = 1.0;  // in (0, 1]

    void validate() const;
};

/// How per-step savings are derived from the transferred power.
enum class SavingsRule {
    /// max(0, P_c - P_limit): the literal formula clamped at zero.
    clamped,
    /// max(0, min(P_c, |P_net| - P_limit)): additionally capped by the amount
    /// that would have been curtailed without the converter.
    curtailment_capped,
};

/// Per-step trace of the two-feeder exchange plus the integrated savings.
struct TransferResult {
    TimeSeries p_c_12;
    TimeSeries p_c_21;
    TimeSeries net1_after;
    TimeSeries net2_after;
    TimeSeries save1;
    TimeSeries save2;
    double e_save1_kwh = 0.0;
    double e_save2_kwh = 0.0;
};

/// Savings of each feeder as a function of converter size, f1(S) and f2(S).
struct SavingsCurve {
    std::vector<double> sizes_kva;
    std::vector<double> f1_kwh;
    std::vector<double> f2_kwh;
    double e_save1_max_kwh = 0.0;
    double e_save2_max_kwh = 0.0;
};

/// Inclusive arithmetic grid of converter sizes.
struct SizeGridSpec {
    double min_kva = 50.0;
    double max_kva = 1500.0;
    double step_kva = 50.0;

    std::vector<double> points() const;
};

/// Real-power cap of the converter, efficiency times rated size.
double transfer_limit(const ConverterSpec& spec);

TransferResult simulate_transfer(const FeederProfile& p1, const FeederProfile& p2, const ConverterSpec& spec,
                                 SavingsRule rule = SavingsRule::clamped);

/// (sum save1 * dT, sum save2 * dT) in kWh.
std::pair<double, double> annual_savings(const TransferResult& r);

/// Sweeps `sizes` (strictly increasing, at least two points). Grid points are
/// evaluated on up to `threads` worker threads; the result does not depend on
/// the thread count.
SavingsCurve savings_curve(const FeederProfile& p1, const FeederProfile& p2, const std::vector<double>& sizes,
                           double efficiency, SavingsRule rule = SavingsRule::clamped, unsigned threads = 1);

/// Smallest converter size beyond which no step can move more power: the
/// largest instantaneous exchangeable power divided by efficiency.
double saturation_size(const FeederProfile& p1, const FeederProfile& p2, double efficiency);

}  // namespace b2b
