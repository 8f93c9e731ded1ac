// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures. Tolerances are fixed here and nowhere else.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "b2bplan/error.hpp"
#include "b2bplan/network.hpp"
#include "b2bplan/pairing.hpp"
#include "b2bplan/siting.hpp"
#include "b2bplan/sizing.hpp"
#include "b2bplan/transfer.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace {

using namespace b2b;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kData = B2BPLAN_DATA_DIR;

constexpr double kSelectBudgetMs = 1.0;
constexpr double kNrRelTol = 1e-9;
constexpr double kTransferBudgetS = 10.0;
constexpr double kSpearmanMin = 0.8;
constexpr double kStudyBudgetS = 60.0;
constexpr double kVlsmTwoBusTol = 0.01;
constexpr double kVlsmLinearTol = 0.05;
constexpr double kVlsmBudgetS = 5.0;
constexpr double kSitingBudgetS = 30.0;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

SizeOptionTable case1_table() {
    SizeOptionTable t;
    t.s_min = 350;
    t.opt_j1 = {500};
    t.opt_j2 = {400, 450};
    t.opt_tor1 = 600;
    t.opt_tor2 = 350;
    t.s_max = 700;
    t.s_max1 = 700;
    t.s_max2 = 450;
    return t;
}

SizeOptionTable case2_table() {
    SizeOptionTable t;
    t.s_min = 550;
    t.opt_j1 = {400, 600, 700};
    t.opt_j2 = {400};
    t.opt_tor1 = 700;
    t.opt_tor2 = 450;
    t.s_max = 900;
    t.s_max1 = 900;
    t.s_max2 = 550;
    return t;
}

Outcome case_arithmetic() {
    Outcome o;
    const auto t1 = case1_table();
    const auto t2 = case2_table();
    const auto t0 = Clock::now();
    const auto d1 = select_optimal(t1);
    const auto d2 = select_optimal(t2);
    const double ms = seconds_since(t0) * 1e3;
    o.require(d1.s_opt_kva == 400.0, "case 1 selected " + fmt("%g", d1.s_opt_kva));
    o.require(d2.s_opt_kva == 700.0, "case 2 selected " + fmt("%g", d2.s_opt_kva));
    o.require(ms < kSelectBudgetMs, "took " + fmt("%.3f", ms) + " ms");
    if (o.pass) o.detail = "400 and 700 kVA in " + fmt("%.3f", ms) + " ms";
    return o;
}

Outcome limit_combination() {
    Outcome o;
    const auto sizes = SizeGridSpec{200, 1500, 50}.points();
    const EconomicParams e;  // 80% retention on both feeders
    struct Case {
        double max1, min1, max2, min2, want_max, want_min;
    };
    for (const Case& c : {Case{700, 350, 450, 250, 700, 350}, Case{900, 550, 550, 300, 900, 550}}) {
        NetRevenueCurve nr;
        nr.sizes_kva = sizes;
        nr.nr1 = testing::bump_curve(sizes, c.max1, c.min1);
        nr.nr2 = testing::bump_curve(sizes, c.max2, c.min2);
        const double s1 = find_s_max(nr.nr1, sizes), s2 = find_s_max(nr.nr2, sizes);
        const auto m = min_sizes(nr, e);
        o.require(s1 == c.max1 && s2 == c.max2, "per-feeder maxima " + fmt("%g", s1) + "/" + fmt("%g", s2));
        o.require(m.s_min1 == c.min1 && m.s_min2 == c.min2, "per-feeder minima " + fmt("%g", m.s_min1) + "/" +
                                                                fmt("%g", m.s_min2));
        o.require(std::max(s1, s2) == c.want_max, "combined max " + fmt("%g", std::max(s1, s2)));
        o.require(m.s_min == c.want_min, "combined min " + fmt("%g", m.s_min));
    }
    if (o.pass) o.detail = "max 700, min 350, max 900, min 550";
    return o;
}

SavingsCurve curve_of(const std::vector<double>& sizes, std::vector<double> f1, std::vector<double> f2) {
    SavingsCurve c;
    c.sizes_kva = sizes;
    c.f1_kwh = std::move(f1);
    c.f2_kwh = std::move(f2);
    c.e_save1_max_kwh = *std::max_element(c.f1_kwh.begin(), c.f1_kwh.end());
    c.e_save2_max_kwh = *std::max_element(c.f2_kwh.begin(), c.f2_kwh.end());
    return c;
}

Outcome revenue_substitutes() {
    Outcome o;
    testing::Rng rng(20240601);
    const auto sizes = SizeGridSpec{50, 1500, 50}.points();

    double worst = 0.0;
    for (int draw = 0; draw < 10000 && o.pass; ++draw) {
        const auto e = testing::random_economics(rng);
        const auto c = curve_of(sizes, testing::random_savings(rng, sizes, testing::uniform(rng, 1e3, 1e6)),
                                testing::random_savings(rng, sizes, testing::uniform(rng, 1e3, 1e6)));
        const double m1 = c.e_save1_max_kwh, m2 = c.e_save2_max_kwh;
        const double g1 = m1 / (m1 + m2), g2 = m2 / (m1 + m2);
        const auto nr = net_revenue_curves(c, e, cost_split(c));
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            const double cost = e.lambda_c * sizes[i] + e.n_yr * e.lambda_cm;
            const double r1 = e.n_yr * e.lambda_pv * c.f1_kwh[i] - g1 * cost;
            const double r2 = e.n_yr * e.lambda_pv * c.f2_kwh[i] - g2 * cost;
            const double total = e.n_yr * e.lambda_pv * (c.f1_kwh[i] + c.f2_kwh[i]) - cost;
            const double scale = std::max({1.0, std::abs(r1), std::abs(r2), std::abs(total)});
            const double err = std::max({std::abs(nr.nr1[i] - r1), std::abs(nr.nr2[i] - r2),
                                         std::abs(nr.nr[i] - total)}) / scale;
            worst = std::max(worst, err);
        }
        // Integer-valued curves: differences and their running sums are exact.
        std::vector<double> ints(sizes.size());
        for (auto& v : ints) v = static_cast<double>(testing::uniform_int(rng, -1000000, 1000000));
        const auto d = discrete_derivatives(ints);
        double acc = ints[0], acc1 = d.d1[0], acc2 = d.d2[0];
        for (std::size_t k = 0; k < d.d1.size(); ++k) {
            acc += d.d1[k];
            o.require(acc == ints[k + 1], "first differences do not sum back");
        }
        for (std::size_t k = 0; k < d.d2.size(); ++k) {
            acc1 += d.d2[k];
            o.require(acc1 == d.d1[k + 1], "second differences do not sum back");
        }
        for (std::size_t k = 0; k < d.d3.size(); ++k) {
            acc2 += d.d3[k];
            o.require(acc2 == d.d2[k + 1], "third differences do not sum back");
        }
        // Library revenue curves: same property within rounding of the values.
        const auto dn = discrete_derivatives(nr.nr);
        double back = nr.nr[0];
        double peak = 0.0;
        for (double v : nr.nr) peak = std::max(peak, std::abs(v));
        for (std::size_t k = 0; k < dn.d1.size(); ++k) {
            back += dn.d1[k];
            o.require(std::abs(back - nr.nr[k + 1]) <= 64 * 0x1p-52 * peak, "revenue differences drift");
        }
    }
    o.require(worst <= kNrRelTol, "revenue identity off by " + fmt("%.2e", worst));

    int compared = 0;
    for (int draw = 0; draw < 1000 && o.pass; ++draw) {
        const auto e = testing::random_economics(rng);
        const auto c = curve_of(sizes, testing::random_savings(rng, sizes, 2e5), testing::random_savings(rng, sizes, 2e5));
        const double k = std::ldexp(1.0, testing::uniform_int(rng, -6, 6));
        auto scaled = e;
        scaled.lambda_pv *= k;
        scaled.lambda_c *= k;
        scaled.lambda_cm *= k;
        SizingAnalysis a, b;
        bool a_ok = true, b_ok = true;
        try {
            a = analyze_sizing(c, e);
        } catch (const UneconomicError&) {
            a_ok = false;
        }
        try {
            b = analyze_sizing(c, scaled);
        } catch (const UneconomicError&) {
            b_ok = false;
        }
        o.require(a_ok == b_ok, "scaling changed economic feasibility");
        if (!a_ok || !b_ok) continue;
        o.require(a.s_max1 == b.s_max1 && a.s_max2 == b.s_max2, "scaling moved the revenue peak");
        o.require(a.turning1 == b.turning1 && a.turning2 == b.turning2, "scaling moved turning points");
        o.require(a.decision.s_opt_kva == b.decision.s_opt_kva, "scaling changed the selection");
        ++compared;
    }
    o.require(compared >= 500, "only " + fmt("%g", compared) + " economic draws");
    if (o.pass) {
        o.detail = "identity " + fmt("%.1e", worst) + " over 10000 draws, inversion exact, " + fmt("%g", compared) +
                   "/1000 scaling draws compared";
    }
    return o;
}

Outcome transfer_properties() {
    Outcome o;
    testing::Rng rng(20240602);
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(75.0 * i);
    const auto t0 = Clock::now();
    for (int pair = 0; pair < 1000 && o.pass; ++pair) {
        // Multiples of 1/8 kW keep every sum exact, so conservation is checked with ==.
        const auto p1 = testing::dyadic_profile(rng, 336, 0.5).with_backfeed_limit(testing::uniform_int(rng, 0, 40) * 8.0);
        const auto p2 = testing::dyadic_profile(rng, 336, 0.5).with_backfeed_limit(testing::uniform_int(rng, 0, 40) * 8.0);
        const ConverterSpec spec{static_cast<double>(testing::uniform_int(rng, 0, 1500)), 1.0};
        const double cap = transfer_limit(spec);
        const auto r = simulate_transfer(p1, p2, spec);
        for (std::size_t t = 0; t < p1.size(); ++t) {
            const double n1 = p1.load()[t] - p1.der()[t];
            const double n2 = p2.load()[t] - p2.der()[t];
            o.require(r.net1_after[t] + r.net2_after[t] == n1 + n2, "net-load sum not conserved");
            o.require(r.p_c_12[t] >= 0 && r.p_c_12[t] <= cap && r.p_c_21[t] >= 0 && r.p_c_21[t] <= cap,
                      "transfer exceeds the converter limit");
            o.require(r.p_c_12[t] == 0.0 || r.p_c_21[t] == 0.0, "both directions active in one step");
        }
        const double eta = testing::uniform(rng, 0.9, 1.0);
        const auto curve = savings_curve(p1, p2, grid, eta);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            o.require(curve.f1_kwh[i] >= curve.f1_kwh[i - 1] && curve.f2_kwh[i] >= curve.f2_kwh[i - 1],
                      "savings decrease with size");
        }
    }
    const double s = seconds_since(t0);
    o.require(s < kTransferBudgetS, "took " + fmt("%.2f", s) + " s");
    if (o.pass) o.detail = "1000 pairs, n_t 336, 20-point grid in " + fmt("%.2f", s) + " s";
    return o;
}

Outcome pairing_trend() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto res = scenario_grid_study(StudyConfig{});
    const double s = seconds_since(t0);
    o.require(res.rows.size() == 24, "table has " + fmt("%g", static_cast<double>(res.rows.size())) + " rows");
    std::set<StudyArea> areas;
    std::set<double> ratios;
    for (const auto& r : res.rows) {
        areas.insert(r.scenario.area);
        ratios.insert(r.scenario.pratio);
    }
    o.require(areas.size() == 4, "areas missing");
    o.require(ratios == std::set<double>(kStudyRatios.begin(), kStudyRatios.end()), "ratio set differs");
    o.require(res.spearman_rho.has_value(), "rank correlation undefined");
    const double rho = res.spearman_rho.value_or(-2.0);
    o.require(rho >= kSpearmanMin, "rho " + fmt("%.3f", rho));
    o.require(s < kStudyBudgetS, "took " + fmt("%.1f", s) + " s");
    if (o.pass) o.detail = "24 rows, rho " + fmt("%.3f", rho) + " in " + fmt("%.1f", s) + " s";
    return o;
}

Outcome vlsm_fidelity() {
    Outcome o;
    const auto t0 = Clock::now();

    const auto two = load_network_json(kData / "networks" / "two_bus.json");
    const auto m2 = compute_vlsm(two);
    const auto i2 = two.index_of(2);
    const double analytic = testing::two_bus_model(two).dv2_dp() / 1000.0;
    const double rel2 = std::abs(m2.vlsmp(i2, i2) - analytic) / std::abs(analytic);
    o.require(rel2 <= kVlsmTwoBusTol, "2-bus entry off by " + fmt("%.2e", rel2));

    const auto ten = load_network_json(kData / "networks" / "ten_bus.json");
    const VlsmOptions opts;
    const auto m = compute_vlsm(ten, opts);
    const auto base = solve_power_flow(ten, opts.flow);
    testing::Rng rng(20240603);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        // Total perturbation at most 1% of feeder load, spread at random.
        const double budget = testing::uniform(rng, 0.001, 0.01) * ten.total_load_kw();
        std::vector<double> dp(ten.n_node(), 0.0);
        double total = 0.0;
        for (std::size_t b = 0; b < ten.n_node(); ++b) {
            if (b == ten.source_index()) continue;
            dp[b] = testing::uniform(rng, 0.0, 1.0);
            total += dp[b];
        }
        std::vector<double> p, q;
        for (std::size_t b = 0; b < ten.n_node(); ++b) {
            dp[b] *= budget / total;
            p.push_back(ten.buses()[b].p_kw + dp[b]);
            q.push_back(ten.buses()[b].q_kvar);
        }
        const auto sol = solve_power_flow(ten.with_loads(p, q), opts.flow);
        o.require(sol.converged, "perturbed flow did not converge");
        for (std::size_t a = 0; a < ten.n_node(); ++a) {
            if (a == ten.source_index()) continue;
            double pred = 0.0;
            for (std::size_t b = 0; b < ten.n_node(); ++b) pred += m.vlsmp(a, b) * dp[b];
            const double actual = sol.v_pu[a] - base.v_pu[a];
            worst = std::max(worst, std::abs(pred - actual) / std::abs(actual));
        }
    }
    o.require(worst <= kVlsmLinearTol, "10-bus prediction off by " + fmt("%.2e", worst));

    // Step halving: forward differences are first order, so successive
    // changes shrink by half and the Richardson estimate beats the finest step.
    auto at = [&](double h) {
        VlsmOptions v;
        v.delta_p_kw = v.delta_q_kvar = h;
        v.flow.tolerance_pu = 1e-13;
        return compute_vlsm(ten, v);
    };
    const auto h1 = at(40.0), h2 = at(20.0), h3 = at(10.0), ref = at(0.25);
    double ratio_dev = 0.0;
    for (std::size_t a = 0; a < ten.n_node(); ++a) {
        for (std::size_t b = 0; b < ten.n_node(); ++b) {
            if (h1.vlsmp(a, b) == 0.0) continue;
            const double e1 = h1.vlsmp(a, b) - h2.vlsmp(a, b);
            const double e2 = h2.vlsmp(a, b) - h3.vlsmp(a, b);
            ratio_dev = std::max(ratio_dev, std::abs(e2 / e1 - 0.5));
            const double rich = 2.0 * h3.vlsmp(a, b) - h2.vlsmp(a, b);
            o.require(std::abs(rich - ref.vlsmp(a, b)) < std::abs(h3.vlsmp(a, b) - ref.vlsmp(a, b)),
                      "Richardson estimate no better than the finest step");
        }
    }
    o.require(ratio_dev <= 0.05, "halving ratio deviates by " + fmt("%.3f", ratio_dev));

    const double s = seconds_since(t0);
    o.require(s < kVlsmBudgetS, "took " + fmt("%.2f", s) + " s");
    if (o.pass) {
        o.detail = "2-bus " + fmt("%.1e", rel2) + ", 10-bus " + fmt("%.1e", worst) + ", halving ratio 0.5+-" +
                   fmt("%.3f", ratio_dev) + " in " + fmt("%.2f", s) + " s";
    }
    return o;
}

Outcome siting_correctness() {
    Outcome o;
    testing::Rng rng(20240604);
    const auto t0 = Clock::now();
    for (int trial = 0; trial < 50 && o.pass; ++trial) {
        const auto net = testing::tame(testing::random_feeder(rng, testing::uniform_int(rng, 10, 100)));
        const auto m = compute_vlsm(net);
        std::vector<int> loads;
        for (const auto& b : net.buses()) {
            if (b.kind == BusKind::load) loads.push_back(b.id);
        }
        std::shuffle(loads.begin(), loads.end(), rng);
        SitingConfig cfg;
        cfg.der_buses.assign(loads.begin(), loads.begin() + testing::uniform_int(rng, 1, 4));
        if (testing::uniform_int(rng, 0, 3) == 0) cfg.excluded_buses.push_back(loads.back());

        for (double alpha : {testing::uniform(rng, 0.0, 1.0), 0.25, 0.5, 0.75}) {
            cfg.alpha = alpha;
            cfg.beta = 1.0 - alpha;
            o.require(site_connection_point(net, m, cfg).selected_bus == testing::brute_force_site(net, m, cfg),
                      "argmin differs from enumeration on trial " + fmt("%g", trial));
        }
        const auto rows = testing::brute_force_rows(net, m, cfg);
        cfg.alpha = 1.0;
        cfg.beta = 0.0;
        o.require(site_connection_point(net, m, cfg).selected_bus ==
                      testing::argmin_lowest_id(rows, [](const testing::BruteForceRow& r) { return r.p_sum; }),
                  "beta = 0 did not pick the smallest sensitivity sum");
        cfg.alpha = 0.0;
        cfg.beta = 1.0;
        o.require(site_connection_point(net, m, cfg).selected_bus ==
                      testing::argmin_lowest_id(rows, [](const testing::BruteForceRow& r) { return r.dist_sum; }),
                  "alpha = 0 did not pick the shortest total distance");
    }
    const double s = seconds_since(t0);
    o.require(s < kSitingBudgetS, "took " + fmt("%.2f", s) + " s");
    if (o.pass) o.detail = "50 feeders, 10-100 buses, in " + fmt("%.2f", s) + " s";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "b2bplan_acceptance";
    fs::remove_all(root);
    const std::string args = " size --feeder1 " + (kData / "profiles" / "case1_feeder1.csv").string() +
                             " --feeder2 " + (kData / "profiles" / "case1_feeder2.csv").string() + " --config " +
                             (kData / "configs" / "case1.json").string();
    std::vector<std::pair<std::string, std::string>> runs;
    for (const char* tag : {"a1", "b1", "c4", "d8"}) {
        const auto dir = root / tag;
        fs::create_directories(dir);
        const std::string threads(tag + 1);
        const std::string cmd = std::string(B2BPLAN_CLI_PATH) + args + " --threads " + threads + " --out " +
                                (dir / "report.json").string() + " >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        o.require(WIFEXITED(rc) && WEXITSTATUS(rc) == 0, std::string("run ") + tag + " failed");
        runs.push_back({slurp(dir / "report.json"), slurp(dir / "report_curves.csv")});
    }
    for (const auto& r : runs) {
        o.require(!r.first.empty() && r.first == runs.front().first, "report bytes differ");
        o.require(!r.second.empty() && r.second == runs.front().second, "curves bytes differ");
    }
    fs::remove_all(root);
    if (o.pass) o.detail = "4 runs at 1, 1, 4 and 8 threads identical";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"case-arithmetic", case_arithmetic},
        {"limit-combination", limit_combination},
        {"revenue-identity-inversion-scaling", revenue_substitutes},
        {"transfer-properties", transfer_properties},
        {"pairing-trend", pairing_trend},
        {"vlsm-fidelity", vlsm_fidelity},
        {"siting-correctness", siting_correctness},
        {"cli-determinism", cli_determinism},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %-36s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures;
}
