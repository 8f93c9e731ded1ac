#include "b2bplan/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <thread>

#include "b2bplan/error.hpp"

namespace b2b {

double std_criterion(const FeederProfile& p1, const FeederProfile& p2) {
    if (!p1.load().aligned_with(p2.load())) throw InvalidArgument("feeder profiles are misaligned");
    return profile_stats(p1.load()).std_kw + profile_stats(p2.load()).std_kw;
}

std::vector<PairScore> rank_pairs(std::span<const NamedProfile> candidates, std::size_t top_k) {
    if (candidates.size() < 2) throw InvalidArgument("need at least two feeders to form a pair");

    std::vector<ProfileStats> stats;
    stats.reserve(candidates.size());
    for (const auto& c : candidates) stats.push_back(profile_stats(c.profile.load()));

    std::vector<PairScore> scores;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            const auto& a = candidates[i];
            const auto& b = candidates[j];
            if (!a.profile.load().aligned_with(b.profile.load())) {
                throw InvalidArgument("profiles '" + a.label + "' and '" + b.label + "' are misaligned");
            }
            const bool swap = b.label < a.label;
            const auto& sa = swap ? stats[j] : stats[i];
            const auto& sb = swap ? stats[i] : stats[j];
            PairScore s;
            s.pair_id = swap ? std::pair{b.label, a.label} : std::pair{a.label, b.label};
            s.std_sum_kw = sa.std_kw + sb.std_kw;
            s.pratio = sb.peak_kw > 0.0 ? sa.peak_kw / sb.peak_kw : std::numeric_limits<double>::infinity();
            scores.push_back(std::move(s));
        }
    }
    std::stable_sort(scores.begin(), scores.end(), [](const PairScore& x, const PairScore& y) {
        if (x.std_sum_kw != y.std_sum_kw) return x.std_sum_kw > y.std_sum_kw;
        return x.pair_id < y.pair_id;
    });
    if (top_k < scores.size()) scores.resize(top_k);
    return scores;
}

std::vector<PairScenario> scenario_grid() {
    std::vector<PairScenario> out;
    out.reserve(kStudyAreas.size() * kStudyRatios.size());
    for (StudyArea area : kStudyAreas) {
        for (double r : kStudyRatios) {
            PairScenario s;
            s.area = area;
            s.pratio = r;
            switch (area) {
                case StudyArea::comm_comm:
                    s.low_kind = s.high_kind = LoadClass::commercial;
                    break;
                case StudyArea::res_res:
                    s.low_kind = s.high_kind = LoadClass::residential;
                    break;
                case StudyArea::comm_high_res:
                    s.low_kind = LoadClass::residential;
                    s.high_kind = LoadClass::commercial;
                    break;
                case StudyArea::res_high_comm:
                    s.low_kind = LoadClass::commercial;
                    s.high_kind = LoadClass::residential;
                    break;
            }
            out.push_back(s);
        }
    }
    return out;
}

StudyResult scenario_grid_study(const StudyConfig& cfg) {
    const auto grid = scenario_grid();
    StudyResult result;
    result.rows.resize(grid.size());

    auto evaluate = [&](std::size_t i) {
        const auto& sc = grid[i];
        // Feeder 1 carries the lower peak so pratio = peak1 / peak2.
        SynthOptions low{sc.low_kind, sc.pratio * cfg.high_peak_kw, cfg.days, cfg.step_hours,
                         cfg.pv_penetration * sc.pratio * cfg.high_peak_kw, cfg.seed + 2 * i};
        SynthOptions high{sc.high_kind, cfg.high_peak_kw, cfg.days, cfg.step_hours,
                          cfg.pv_penetration * cfg.high_peak_kw, cfg.seed + 2 * i + 1};
        const auto p1 = synth_profile(low).with_backfeed_limit(cfg.backfeed_limit_kw);
        const auto p2 = synth_profile(high).with_backfeed_limit(cfg.backfeed_limit_kw);
        const auto tr = simulate_transfer(p1, p2, ConverterSpec{cfg.reference_size_kva, cfg.efficiency});
        const double years = static_cast<double>(p1.size()) * p1.step_hours() / 8760.0;
        result.rows[i] = StudyRow{sc, std_criterion(p1, p2), (tr.e_save1_kwh + tr.e_save2_kwh) / years};
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(grid.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < grid.size(); i += workers) evaluate(i);
            });
        }
    }

    std::vector<double> stds, savings;
    for (const auto& r : result.rows) {
        stds.push_back(r.std_sum_kw);
        savings.push_back(r.annual_savings_kwh);
    }
    result.spearman_rho = spearman(stds, savings);
    return result;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("spearman: columns differ in length");
    if (x.size() < 2) return std::nullopt;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::string to_string(StudyArea area) {
    switch (area) {
        case StudyArea::comm_comm: return "comm/comm";
        case StudyArea::res_res: return "res/res";
        case StudyArea::comm_high_res: return "comm-high/res";
        case StudyArea::res_high_comm: return "res-high/comm";
    }
    return "unknown";
}

}  // namespace b2b
