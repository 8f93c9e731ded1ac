#include "b2bplan/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "b2bplan/error.hpp"
#include "b2bplan/format.hpp"

namespace b2b {

namespace {

std::string kva(double v) { return format_number(v) + " kVA"; }

std::string list_kva(const std::vector<double>& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_number(v[i]);
    }
    return out + "}";
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) throw InvalidArgument(std::string(what) + ": curve and size grid lengths differ");
    if (a.empty()) throw InvalidArgument(std::string(what) + ": empty curve");
}

std::size_t first_argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

bool strict_extremum(std::span<const double> v, std::size_t k, double tol) {
    const double prev = v[k - 1];
    const double here = v[k];
    const double next = v[k + 1];
    return (here < prev - tol && here < next - tol) || (here > prev + tol && here > next + tol);
}

}  // namespace

void EconomicParams::validate() const {
    if (lambda_pv < 0.0 || lambda_c < 0.0 || lambda_cm < 0.0) throw InvalidArgument("prices must be nonnegative");
    if (!(n_yr >= 1.0)) throw InvalidArgument("planning horizon must be at least one year");
    if (!(p1_limit > 0.0 && p1_limit <= 1.0) || !(p2_limit > 0.0 && p2_limit <= 1.0)) {
        throw InvalidArgument("value-retention limits must lie in (0, 1]");
    }
}

CostSplit cost_split(const SavingsCurve& curve) {
    const double total = curve.e_save1_max_kwh + curve.e_save2_max_kwh;
    if (!(total > 0.0)) {
        throw UneconomicError("no exchangeable energy; feeders gain nothing from connection");
    }
    const double g1 = curve.e_save1_max_kwh / total;
    return {g1, 1.0 - g1};
}

NetRevenueCurve net_revenue_curves(const SavingsCurve& curve, const EconomicParams& econ, const CostSplit& split) {
    if (curve.sizes_kva.empty()) throw InvalidArgument("size grid is empty");
    NetRevenueCurve out;
    out.sizes_kva = curve.sizes_kva;
    const std::size_t n = curve.sizes_kva.size();
    out.nr.resize(n);
    out.nr1.resize(n);
    out.nr2.resize(n);
    const double revenue_per_kwh = econ.n_yr * econ.lambda_pv;
    const double maintenance = econ.n_yr * econ.lambda_cm;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = curve.sizes_kva[i];
        const double cost = econ.lambda_c * s + maintenance;
        out.nr[i] = revenue_per_kwh * (curve.f1_kwh[i] + curve.f2_kwh[i]) - econ.lambda_c * s - maintenance;
        out.nr1[i] = revenue_per_kwh * curve.f1_kwh[i] - split.gamma1 * cost;
        out.nr2[i] = revenue_per_kwh * curve.f2_kwh[i] - split.gamma2 * cost;
    }
    return out;
}

DerivativeSet discrete_derivatives(std::span<const double> values) {
    if (values.size() < 4) {
        throw InvalidArgument("need at least 4 points for third differences, got " + std::to_string(values.size()));
    }
    auto diff = [](std::span<const double> v) {
        std::vector<double> out(v.size() - 1);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = v[i + 1] - v[i];
        return out;
    };
    DerivativeSet d;
    d.d1 = diff(values);
    d.d2 = diff(d.d1);
    d.d3 = diff(d.d2);
    // Third differences sum eight rounded inputs; 256 ulps of the largest
    // magnitude leaves a wide margin.
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    d.noise_floor = 256.0 * std::numeric_limits<double>::epsilon() * scale;
    return d;
}

double find_s_max(std::span<const double> nr, std::span<const double> sizes) {
    require_same_length(nr, sizes, "find_s_max");
    return sizes[first_argmax(nr)];
}

std::vector<double> turning_points(const DerivativeSet& d, std::span<const double> sizes) {
    if (d.d1.size() + 1 != sizes.size()) throw InvalidArgument("derivative set does not match size grid");
    std::vector<double> out;
    // d2[k] belongs to sizes[k + 2], d3[k] to sizes[k + 3].
    for (std::size_t k = 1; k + 1 < d.d2.size(); ++k) {
        if (strict_extremum(d.d2, k, d.noise_floor)) out.push_back(sizes[k + 2]);
    }
    for (std::size_t k = 1; k + 1 < d.d3.size(); ++k) {
        if (strict_extremum(d.d3, k, d.noise_floor)) out.push_back(sizes[k + 3]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ReturnAnalysis return_analysis(std::span<const double> savings_kwh, std::span<const double> sizes,
                               const EconomicParams& econ) {
    require_same_length(savings_kwh, sizes, "return_analysis");
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = sizes.size();
    ReturnAnalysis ra;
    ra.tor_years.resize(n);
    ra.vol_dollars.resize(n);
    ra.dvt.resize(n);

    bool any = false;
    double max_vol = 0.0;
    double max_tor = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = savings_kwh[i];
        ra.vol_dollars[i] = econ.n_yr * econ.lambda_pv * f;
        if (f > 0.0 && econ.lambda_pv > 0.0) {
            ra.tor_years[i] = econ.lambda_c * sizes[i] / (econ.lambda_pv * f);
            max_tor = std::max(max_tor, std::abs(ra.tor_years[i]));
            any = true;
        } else {
            ra.tor_years[i] = inf;
        }
        max_vol = std::max(max_vol, std::abs(ra.vol_dollars[i]));
    }
    if (!any) throw UneconomicError("feeder saves no energy at any converter size; time of return undefined");

    // Free capital makes every ToR zero; value alone then decides.
    ra.ratio_vt = max_tor > 0.0 ? max_vol / max_tor : 1.0;

    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isinf(ra.tor_years[i])) {
            ra.dvt[i] = -inf;
            continue;
        }
        ra.dvt[i] = ra.vol_dollars[i] / ra.ratio_vt - ra.tor_years[i];
        if (best == n || ra.dvt[i] > ra.dvt[best]) best = i;
    }
    ra.best_size_kva = sizes[best];
    return ra;
}

double feeder_min_size(std::span<const double> nr, std::span<const double> sizes, double fraction,
                       int feeder_index) {
    require_same_length(nr, sizes, "feeder_min_size");
    const std::size_t peak = first_argmax(nr);
    const double best = nr[peak];
    if (!(best > 0.0)) {
        throw UneconomicError("connection uneconomic for feeder " + std::to_string(feeder_index) +
                              ": maximum net revenue " + format_number(best) + " $ is not positive");
    }
    const double threshold = fraction * best;
    for (std::size_t i = 0; i <= peak; ++i) {
        if (nr[i] >= threshold) return sizes[i];
    }
    return sizes[peak];
}

MinSizes min_sizes(const NetRevenueCurve& curve, const EconomicParams& econ) {
    MinSizes m;
    m.s_min1 = feeder_min_size(curve.nr1, curve.sizes_kva, econ.p1_limit, 1);
    m.s_min2 = feeder_min_size(curve.nr2, curve.sizes_kva, econ.p2_limit, 2);
    m.s_min = std::max(m.s_min1, m.s_min2);
    return m;
}

SizingDecision select_optimal(const SizeOptionTable& table) {
    if (table.s_min > table.s_max) {
        throw InvalidArgument("option table has s_min " + kva(table.s_min) + " above s_max " + kva(table.s_max));
    }
    SizingDecision dec;
    dec.subset.s_min = table.s_min;
    dec.subset.s_max = table.s_max;
    dec.subset.s_max1 = table.s_max1;
    dec.subset.s_max2 = table.s_max2;
    dec.subset.opt_tor1 = table.opt_tor1;
    dec.subset.opt_tor2 = table.opt_tor2;

    auto& audit = dec.audit;
    audit.push_back("options: s_min=" + kva(table.s_min) + ", opt_j1=" + list_kva(table.opt_j1) +
                    ", opt_j2=" + list_kva(table.opt_j2) + ", opt_tor1=" + kva(table.opt_tor1) +
                    ", opt_tor2=" + kva(table.opt_tor2) + ", s_max=" + kva(table.s_max));

    auto survives = [&](double c, const std::optional<double>& own_max) {
        if (!(c > table.s_min)) return false;
        return own_max ? c < *own_max : c <= table.s_max;
    };
    auto bound_text = [&](const std::optional<double>& own_max) {
        return own_max ? "(" + format_number(table.s_min) + ", " + format_number(*own_max) + ")"
                       : "(" + format_number(table.s_min) + ", " + format_number(table.s_max) + "]";
    };

    for (double c : table.opt_j1) {
        if (survives(c, table.s_max1)) dec.subset.opt_j1.push_back(c);
    }
    for (double c : table.opt_j2) {
        if (survives(c, table.s_max2)) dec.subset.opt_j2.push_back(c);
    }
    dec.tor1_survives = survives(table.opt_tor1, table.s_max1);
    dec.tor2_survives = survives(table.opt_tor2, table.s_max2);

    audit.push_back("feeder 1 candidates kept in " + bound_text(table.s_max1) + ": opt_j1 " +
                    list_kva(dec.subset.opt_j1) + ", opt_tor1 " + (dec.tor1_survives ? "kept" : "dropped"));
    audit.push_back("feeder 2 candidates kept in " + bound_text(table.s_max2) + ": opt_j2 " +
                    list_kva(dec.subset.opt_j2) + ", opt_tor2 " + (dec.tor2_survives ? "kept" : "dropped"));

    std::vector<double> tor_group;
    if (dec.tor1_survives) tor_group.push_back(table.opt_tor1);
    if (dec.tor2_survives) tor_group.push_back(table.opt_tor2);

    std::vector<double> group_maxes;
    auto take_max = [&](const std::vector<double>& group, const char* name) {
        if (group.empty()) {
            audit.push_back(std::string(name) + ": empty, skipped");
            return;
        }
        const double m = *std::max_element(group.begin(), group.end());
        audit.push_back(std::string(name) + ": max" + list_kva(group) + " = " + kva(m));
        group_maxes.push_back(m);
    };
    take_max(dec.subset.opt_j1, "opt_j1");
    take_max(dec.subset.opt_j2, "opt_j2");
    take_max(tor_group, "opt_tor");

    if (group_maxes.empty()) {
        dec.s_opt_kva = table.s_min;
        dec.rule_applied = SelectionRule::all_below_min;
        audit.push_back("no candidate above s_min; S_opt = s_min = " + kva(dec.s_opt_kva));
    } else {
        dec.s_opt_kva = *std::min_element(group_maxes.begin(), group_maxes.end());
        dec.rule_applied = SelectionRule::min_of_maxes;
        audit.push_back("S_opt = min" + list_kva(group_maxes) + " = " + kva(dec.s_opt_kva));
    }
    return dec;
}

SizingAnalysis analyze_sizing(const SavingsCurve& savings, const EconomicParams& econ) {
    econ.validate();
    SizingAnalysis a;
    a.savings = savings;
    a.split = cost_split(savings);
    a.revenue = net_revenue_curves(savings, econ, a.split);
    const auto& sizes = a.revenue.sizes_kva;

    a.mins = min_sizes(a.revenue, econ);
    a.s_max1 = find_s_max(a.revenue.nr1, sizes);
    a.s_max2 = find_s_max(a.revenue.nr2, sizes);

    a.deriv1 = discrete_derivatives(a.revenue.nr1);
    a.deriv2 = discrete_derivatives(a.revenue.nr2);
    a.turning1 = turning_points(a.deriv1, sizes);
    a.turning2 = turning_points(a.deriv2, sizes);

    a.return1 = return_analysis(savings.f1_kwh, sizes, econ);
    a.return2 = return_analysis(savings.f2_kwh, sizes, econ);

    a.table.s_min = a.mins.s_min;
    a.table.opt_j1 = a.turning1;
    a.table.opt_j2 = a.turning2;
    a.table.opt_tor1 = a.return1.best_size_kva;
    a.table.opt_tor2 = a.return2.best_size_kva;
    a.table.s_max = std::max(a.s_max1, a.s_max2);
    a.table.s_max1 = a.s_max1;
    a.table.s_max2 = a.s_max2;

    a.decision = select_optimal(a.table);
    return a;
}

std::string to_string(SelectionRule rule) {
    return rule == SelectionRule::all_below_min ? "all-below-min" : "min-of-maxes";
}

}  // namespace b2b
