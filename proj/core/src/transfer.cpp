#include "b2bplan/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "b2bplan/error.hpp"
#include "b2bplan/format.hpp"

namespace b2b {

void ConverterSpec::validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw InvalidArgument("converter efficiency must lie in (0, 1], got " + format_number(efficiency));
    }
    if (!(size_kva >= 0.0) || !std::isfinite(size_kva)) {
        throw InvalidArgument("converter size must be a finite nonnegative kVA value");
    }
}

std::vector<double> SizeGridSpec::points() const {
    if (!(step_kva > 0.0)) throw InvalidArgument("size grid step must be positive");
    if (!(max_kva >= min_kva) || min_kva < 0.0) throw InvalidArgument("size grid bounds are invalid");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((max_kva - min_kva) / step_kva + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(min_kva + step_kva * static_cast<double>(i));
    return out;
}

double transfer_limit(const ConverterSpec& spec) {
    spec.validate();
    return spec.efficiency * spec.size_kva;
}

namespace {

double step_saving(double transferred, double donor_net, double limit, SavingsRule rule) {
    if (transferred <= 0.0) return 0.0;
    if (rule == SavingsRule::curtailment_capped) {
        return std::max(0.0, std::min(transferred, -donor_net - limit));
    }
    return std::max(0.0, transferred - limit);
}

}  // namespace

TransferResult simulate_transfer(const FeederProfile& p1, const FeederProfile& p2, const ConverterSpec& spec,
                                 SavingsRule rule) {
    if (!p1.load().aligned_with(p2.load())) {
        throw InvalidArgument("feeder profiles are misaligned (" + std::to_string(p1.size()) + " vs " +
                              std::to_string(p2.size()) + " steps)");
    }
    const double cap = transfer_limit(spec);
    const std::size_t n = p1.size();
    const double dt = p1.step_hours();

    std::vector<double> c12(n, 0.0), c21(n, 0.0), a1(n), a2(n), s1(n, 0.0), s2(n, 0.0);
    double e1 = 0.0;
    double e2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double n1 = p1.load()[t] - p1.der()[t];
        const double n2 = p2.load()[t] - p2.der()[t];
        a1[t] = n1;
        a2[t] = n2;
        if (n1 < 0.0 && n2 > 0.0) {
            const double pc = std::min({-n1, n2, cap});
            c12[t] = pc;
            a1[t] = n1 + pc;
            a2[t] = n2 - pc;
            s1[t] = step_saving(pc, n1, p1.backfeed_limit_kw(), rule);
        } else if (n1 > 0.0 && n2 < 0.0) {
            const double pc = std::min({n1, -n2, cap});
            c21[t] = pc;
            a1[t] = n1 - pc;
            a2[t] = n2 + pc;
            s2[t] = step_saving(pc, n2, p2.backfeed_limit_kw(), rule);
        }
        e1 += s1[t] * dt;
        e2 += s2[t] * dt;
    }

    return TransferResult{
        TimeSeries(std::move(c12), dt), TimeSeries(std::move(c21), dt), TimeSeries(std::move(a1), dt),
        TimeSeries(std::move(a2), dt),  TimeSeries(std::move(s1), dt),  TimeSeries(std::move(s2), dt),
        e1,
        e2,
    };
}

std::pair<double, double> annual_savings(const TransferResult& r) {
    double e1 = 0.0;
    double e2 = 0.0;
    for (double v : r.save1.values()) e1 += v * r.save1.step_hours();
    for (double v : r.save2.values()) e2 += v * r.save2.step_hours();
    return {e1, e2};
}

SavingsCurve savings_curve(const FeederProfile& p1, const FeederProfile& p2, const std::vector<double>& sizes,
                           double efficiency, SavingsRule rule, unsigned threads) {
    if (sizes.empty()) throw InvalidArgument("size grid is empty");
    if (sizes.size() < 2) throw InvalidArgument("size grid needs at least two points");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (!(sizes[i] > sizes[i - 1])) throw InvalidArgument("size grid must be strictly increasing");
    }
    if (!p1.load().aligned_with(p2.load())) throw InvalidArgument("feeder profiles are misaligned");

    SavingsCurve curve;
    curve.sizes_kva = sizes;
    curve.f1_kwh.assign(sizes.size(), 0.0);
    curve.f2_kwh.assign(sizes.size(), 0.0);

    auto evaluate = [&](std::size_t i) {
        const auto r = simulate_transfer(p1, p2, ConverterSpec{sizes[i], efficiency}, rule);
        curve.f1_kwh[i] = r.e_save1_kwh;
        curve.f2_kwh[i] = r.e_save2_kwh;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sizes.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < sizes.size(); ++i) evaluate(i);
    } else {
        // Strided partition; each slot is written by exactly one worker.
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < sizes.size(); i += workers) evaluate(i);
            });
        }
    }

    curve.e_save1_max_kwh = *std::max_element(curve.f1_kwh.begin(), curve.f1_kwh.end());
    curve.e_save2_max_kwh = *std::max_element(curve.f2_kwh.begin(), curve.f2_kwh.end());
    return curve;
}

double saturation_size(const FeederProfile& p1, const FeederProfile& p2, double efficiency) {
    if (!p1.load().aligned_with(p2.load())) throw InvalidArgument("feeder profiles are misaligned");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
    double peak = 0.0;
    for (std::size_t t = 0; t < p1.size(); ++t) {
        const double n1 = p1.load()[t] - p1.der()[t];
        const double n2 = p2.load()[t] - p2.der()[t];
        if ((n1 < 0.0 && n2 > 0.0) || (n1 > 0.0 && n2 < 0.0)) {
            peak = std::max(peak, std::min(std::abs(n1), std::abs(n2)));
        }
    }
    return peak / efficiency;
}

}  // namespace b2b
