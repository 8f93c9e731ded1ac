#pragma once

#include <optional>
#include <vector>

#include "b2bplan/network.hpp"

namespace b2b {

struct SitingConfig {
    double alpha = 0.5;
    double beta = 0.5;
    std::vector<int> der_buses;
    /// Distance scaling r; computed from the candidates when empty.
    std::optional<double> r_explicit;
    std::vector<int> excluded_buses;

    void validate() const;
};

struct SitingRow {
    int bus_id = 0;
    double p_sum = 0.0;        // pu per kW
    double dist_sum_km = 0.0;
    double c_value = 0.0;
};

struct SitingResult {
    std::vector<SitingRow> per_bus;  // candidate buses, ascending id
    int selected_bus = 0;
    double r_used = 0.0;
};

/// Signed voltage change at `a` caused by `delta_p_kw` more load at `l`.
double voltage_change_at(const SensitivityMatrices& m, int bus_a, int bus_l, double delta_p_kw);

/// Magnitude of the summed voltage change over all buses, |p_sum(l)| * |dP|.
double total_voltage_change(const SensitivityMatrices& m, int bus_l, double delta_p_kw);

/// max(p_sums) / max(dist_sums): brings the distance term to the scale of the
/// sensitivity term.
double magnitude_ratio(const std::vector<double>& p_sums, const std::vector<double>& dist_sums);

/// Objective values within this fraction of the largest C of the minimum are
/// ties for the minimum.
inline constexpr double kSitingTieTolerance = 1e-12;

/// Evaluates C(l) = alpha * p_sum(l) + beta * r * sum_b d(b, l) for every
/// candidate (non-source, non-excluded) bus and picks the minimiser, lowest
/// id on ties.
SitingResult site_connection_point(const FeederNetwork& net, const SensitivityMatrices& m, const SitingConfig& cfg);

}  // namespace b2b
