#include "b2bplan/siting.hpp"

#include <algorithm>
#include <cmath>

#include "b2bplan/error.hpp"
#include "b2bplan/format.hpp"

namespace b2b {

namespace {

std::size_t column_of(const SensitivityMatrices& m, int bus_id) {
    const auto it = std::find(m.bus_ids.begin(), m.bus_ids.end(), bus_id);
    if (it == m.bus_ids.end()) throw InvalidArgument("unknown bus id " + std::to_string(bus_id));
    return static_cast<std::size_t>(it - m.bus_ids.begin());
}

}  // namespace

void SitingConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0) throw InvalidArgument("siting weights must lie in [0, 1]");
    if (std::abs(alpha + beta - 1.0) > 1e-12) {
        throw InvalidArgument("siting weights must sum to 1 (alpha=" + format_number(alpha) +
                              ", beta=" + format_number(beta) + ")");
    }
    if (beta > 0.0 && der_buses.empty()) throw InvalidArgument("beta > 0 needs at least one DER bus");
    if (r_explicit && !(*r_explicit >= 0.0)) throw InvalidArgument("explicit r must be nonnegative");
}

double voltage_change_at(const SensitivityMatrices& m, int bus_a, int bus_l, double delta_p_kw) {
    return m.vlsmp(column_of(m, bus_a), column_of(m, bus_l)) * delta_p_kw;
}

double total_voltage_change(const SensitivityMatrices& m, int bus_l, double delta_p_kw) {
    return column_sensitivity_sum(m, bus_l) * std::abs(delta_p_kw);
}

double magnitude_ratio(const std::vector<double>& p_sums, const std::vector<double>& dist_sums) {
    if (p_sums.empty() || dist_sums.empty()) throw InvalidArgument("magnitude ratio needs nonempty sequences");
    const double max_dist = *std::max_element(dist_sums.begin(), dist_sums.end());
    if (!(max_dist > 0.0)) throw InvalidArgument("all DER distances are zero; magnitude ratio undefined");
    return *std::max_element(p_sums.begin(), p_sums.end()) / max_dist;
}

SitingResult site_connection_point(const FeederNetwork& net, const SensitivityMatrices& m, const SitingConfig& cfg) {
    cfg.validate();
    for (int b : cfg.der_buses) net.index_of(b);

    std::vector<int> candidates;
    for (const auto& b : net.buses()) {
        if (b.kind == BusKind::source) continue;
        if (std::find(cfg.excluded_buses.begin(), cfg.excluded_buses.end(), b.id) != cfg.excluded_buses.end()) continue;
        candidates.push_back(b.id);
    }
    if (candidates.empty()) throw InvalidArgument("no candidates: every non-source bus is excluded");
    std::sort(candidates.begin(), candidates.end());

    SitingResult res;
    std::vector<double> p_sums, dist_sums;
    for (int l : candidates) {
        double dist = 0.0;
        for (int b : cfg.der_buses) dist += electrical_distance(net, b, l);
        p_sums.push_back(column_sensitivity_sum(m, l));
        dist_sums.push_back(dist);
    }

    if (cfg.r_explicit) {
        res.r_used = *cfg.r_explicit;
    } else if (cfg.beta > 0.0) {
        res.r_used = magnitude_ratio(p_sums, dist_sums);
    } else {
        const double max_dist = dist_sums.empty() ? 0.0 : *std::max_element(dist_sums.begin(), dist_sums.end());
        res.r_used = max_dist > 0.0 ? magnitude_ratio(p_sums, dist_sums) : 0.0;
    }

    double c_max = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double c = cfg.alpha * p_sums[i] + cfg.beta * res.r_used * dist_sums[i];
        res.per_bus.push_back(SitingRow{candidates[i], p_sums[i], dist_sums[i], c});
        c_max = std::max(c_max, c);
    }
    // Path sums that are mathematically equal differ in the last bits depending on
    // summation order, so near-equal values count as ties (lowest id wins).
    const double tie = kSitingTieTolerance * c_max;
    double c_min = res.per_bus.front().c_value;
    for (const auto& row : res.per_bus) c_min = std::min(c_min, row.c_value);
    // Rows are in ascending id order, so the first tied row has the lowest id.
    for (const auto& row : res.per_bus) {
        if (row.c_value <= c_min + tie) {
            res.selected_bus = row.bus_id;
            break;
        }
    }
    return res;
}

}  // namespace b2b
