#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "b2bplan/config.hpp"
#include "b2bplan/error.hpp"
#include "b2bplan/format.hpp"
#include "b2bplan/network.hpp"
#include "b2bplan/pairing.hpp"
#include "b2bplan/profiles.hpp"
#include "b2bplan/siting.hpp"
#include "b2bplan/sizing.hpp"
#include "b2bplan/transfer.hpp"

namespace b2b::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

// Non-finite values become null so the report stays valid JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

PlanConfig config_or_default(const std::optional<fs::path>& path) {
    PlanConfig cfg = path ? load_config_json(*path) : PlanConfig{};
    apply_seed_override(cfg);
    return cfg;
}

json config_json(const PlanConfig& c) {
    json j;
    j["economics"] = {{"lambda_pv", c.economics.lambda_pv}, {"lambda_c", c.economics.lambda_c},
                      {"lambda_cm", c.economics.lambda_cm}, {"n_yr", c.economics.n_yr},
                      {"p1_limit", c.economics.p1_limit},   {"p2_limit", c.economics.p2_limit}};
    j["converter"] = {{"efficiency", c.efficiency},
                      {"size_grid",
                       {{"min_kva", c.size_grid.min_kva},
                        {"max_kva", c.size_grid.max_kva},
                        {"step_kva", c.size_grid.step_kva}}},
                      {"cap_savings_by_curtailment", c.savings_rule == SavingsRule::curtailment_capped}};
    j["backfeed_limits"] = {{"feeder1_kw", c.feeder1_backfeed_kw}, {"feeder2_kw", c.feeder2_backfeed_kw}};
    return j;
}

json table_json(const SizeOptionTable& t) {
    json j;
    j["s_min"] = t.s_min;
    j["opt_j1"] = t.opt_j1;
    j["opt_j2"] = t.opt_j2;
    j["opt_tor1"] = t.opt_tor1;
    j["opt_tor2"] = t.opt_tor2;
    j["s_max"] = t.s_max;
    j["s_max1"] = t.s_max1 ? json(*t.s_max1) : json(nullptr);
    j["s_max2"] = t.s_max2 ? json(*t.s_max2) : json(nullptr);
    return j;
}

json feeder_json(const SizingAnalysis& a, int feeder) {
    const bool one = feeder == 1;
    const auto& d = one ? a.deriv1 : a.deriv2;
    const auto& ra = one ? a.return1 : a.return2;
    json j;
    j["e_save_max_kwh"] = one ? a.savings.e_save1_max_kwh : a.savings.e_save2_max_kwh;
    j["gamma"] = one ? a.split.gamma1 : a.split.gamma2;
    j["s_max"] = one ? a.s_max1 : a.s_max2;
    j["s_min"] = one ? a.mins.s_min1 : a.mins.s_min2;
    j["turning_points"] = one ? a.turning1 : a.turning2;
    j["opt_tor"] = ra.best_size_kva;
    j["ratio_vt"] = num(ra.ratio_vt);
    j["derivatives"] = {{"d1", nums(d.d1)}, {"d2", nums(d.d2)}, {"d3", nums(d.d3)}};
    j["return_analysis"] = {{"tor_years", nums(ra.tor_years)}, {"vol_dollars", nums(ra.vol_dollars)},
                            {"dvt", nums(ra.dvt)}};
    return j;
}

void write_curves_csv(const fs::path& path, const SizingAnalysis& a) {
    auto out = open_out(path);
    out << "size_kva,nr,nr1,nr2,f1_kwh,f2_kwh,tor1,tor2,dvt1,dvt2\n";
    const auto& r = a.revenue;
    for (std::size_t i = 0; i < r.sizes_kva.size(); ++i) {
        out << format_number(r.sizes_kva[i]) << ',' << format_number(r.nr[i]) << ',' << format_number(r.nr1[i]) << ','
            << format_number(r.nr2[i]) << ',' << format_number(a.savings.f1_kwh[i]) << ','
            << format_number(a.savings.f2_kwh[i]) << ',' << format_number(a.return1.tor_years[i]) << ','
            << format_number(a.return2.tor_years[i]) << ',' << format_number(a.return1.dvt[i]) << ','
            << format_number(a.return2.dvt[i]) << '\n';
    }
}

json base_report(const char* command) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    return j;
}

}  // namespace

fs::path curves_path_for(const fs::path& report) {
    auto p = report;
    p.replace_filename(report.stem().string() + "_curves.csv");
    return p;
}

fs::path summary_path_for(const fs::path& siting_csv) {
    auto p = siting_csv;
    if (siting_csv.extension() == ".json") {
        p.replace_filename(siting_csv.stem().string() + "_summary.json");
    } else {
        p.replace_extension(".json");
    }
    return p;
}

int run_size(const SizeArgs& args, std::ostream& log, std::ostream& err) {
    PlanConfig cfg;
    SavingsCurve curve;
    json report = base_report("size");
    try {
        cfg = config_or_default(args.config);
        if (args.threads) cfg.threads = *args.threads;
        const auto p1 = load_profile_csv(args.feeder1, cfg.feeder1_backfeed_kw);
        const auto p2 = load_profile_csv(args.feeder2, cfg.feeder2_backfeed_kw);
        if (!p1.load().aligned_with(p2.load())) {
            throw ParseError("feeder profiles are misaligned (" + std::to_string(p1.size()) + " vs " +
                             std::to_string(p2.size()) + " steps)");
        }
        report["inputs"] = {{"feeder1", args.feeder1.filename().string()},
                            {"feeder2", args.feeder2.filename().string()},
                            {"n_t", p1.size()},
                            {"step_hours", p1.step_hours()}};
        report["config"] = config_json(cfg);
        curve = savings_curve(p1, p2, cfg.size_grid.points(), cfg.efficiency, cfg.savings_rule, cfg.threads);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        const auto a = analyze_sizing(curve, cfg.economics);
        report["status"] = "ok";
        report["cost_split"] = {{"gamma1", a.split.gamma1}, {"gamma2", a.split.gamma2}};
        report["feeder1"] = feeder_json(a, 1);
        report["feeder2"] = feeder_json(a, 2);
        report["option_table"] = table_json(a.table);
        json subset = table_json(a.decision.subset);
        subset["opt_tor1_kept"] = a.decision.tor1_survives;
        subset["opt_tor2_kept"] = a.decision.tor2_survives;
        report["subset"] = subset;
        report["decision"] = {{"s_opt_kva", a.decision.s_opt_kva},
                              {"rule_applied", to_string(a.decision.rule_applied)},
                              {"audit", a.decision.audit}};
        const auto curves = curves_path_for(args.out);
        report["curves_csv"] = curves.filename().string();
        write_curves_csv(curves, a);
        write_json(args.out, report);
        log << "optimal converter size: " << format_number(a.decision.s_opt_kva) << " kVA ("
            << to_string(a.decision.rule_applied) << ")\n";
        return kOk;
    } catch (const UneconomicError& e) {
        report["status"] = "uneconomic";
        report["message"] = e.what();
        report["savings"] = {{"sizes_kva", curve.sizes_kva}, {"f1_kwh", curve.f1_kwh}, {"f2_kwh", curve.f2_kwh}};
        try {
            write_json(args.out, report);
        } catch (const Error& io) {
            err << "error: " << io.what() << '\n';
            return kInputError;
        }
        err << "uneconomic: " << e.what() << '\n';
        return kUneconomic;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

int run_pair(const PairArgs& args, std::ostream& log, std::ostream& err) {
    try {
        const auto cfg = config_or_default(args.config);
        if (args.study) {
            auto scfg = study_config(cfg);
            if (args.threads) scfg.threads = *args.threads;
            const auto result = scenario_grid_study(scfg);
            auto out = open_out(args.out);
            out << "# reference_size_kva=" << format_number(scfg.reference_size_kva) << " seed=" << scfg.seed
                << " pv_penetration=" << format_number(scfg.pv_penetration) << '\n';
            out << "area,pratio,std_sum_kw,annual_savings_kwh\n";
            for (const auto& row : result.rows) {
                out << to_string(row.scenario.area) << ',' << format_number(row.scenario.pratio) << ','
                    << format_number(row.std_sum_kw) << ',' << format_number(row.annual_savings_kwh) << '\n';
            }
            out << "# spearman_rho="
                << (result.spearman_rho ? format_number(*result.spearman_rho) : std::string("degenerate")) << '\n';
            log << "scenario study: " << result.rows.size() << " scenarios, spearman rho = "
                << (result.spearman_rho ? format_number(*result.spearman_rho) : std::string("degenerate")) << '\n';
            return kOk;
        }

        if (!args.dir) throw ParseError("pair needs --dir unless --study is given");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(*args.dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.size() < 2) {
            throw ParseError("need at least two profile CSVs in " + args.dir->string() + ", found " +
                             std::to_string(files.size()));
        }
        std::vector<NamedProfile> candidates;
        for (const auto& f : files) candidates.push_back({f.stem().string(), load_profile_csv(f)});
        const auto ranked = rank_pairs(candidates, args.top);

        auto out = open_out(args.out);
        out << "feeder_a,feeder_b,std_sum_kw,pratio,rank\n";
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            const auto& s = ranked[i];
            out << s.pair_id.first << ',' << s.pair_id.second << ',' << format_number(s.std_sum_kw) << ','
                << format_number(s.pratio) << ',' << (i + 1) << '\n';
        }
        log << "ranked " << ranked.size() << " pair(s) from " << candidates.size() << " feeders\n";
        return kOk;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

int run_site(const SiteArgs& args, std::ostream& log, std::ostream& err) {
    PlanConfig cfg;
    std::optional<FeederNetwork> net;
    try {
        cfg = config_or_default(args.config);
        cfg.siting.validate();
        net.emplace(load_network_json(args.network));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    SensitivityMatrices m;
    try {
        const auto base = solve_power_flow(*net, cfg.vlsm.flow);
        if (!base.converged) {
            throw NumericalError("base power flow did not converge after " + std::to_string(base.iterations) +
                                 " iterations (max mismatch " + format_number(base.max_mismatch_kw) + " kW)");
        }
        m = compute_vlsm(*net, cfg.vlsm);
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        const auto res = site_connection_point(*net, m, cfg.siting);
        {
            auto out = open_out(args.out);
            out << "bus_id,p_sum,dist_sum_km,c_value,selected\n";
            for (const auto& row : res.per_bus) {
                out << row.bus_id << ',' << format_number(row.p_sum) << ',' << format_number(row.dist_sum_km) << ','
                    << format_number(row.c_value) << ',' << (row.bus_id == res.selected_bus ? 1 : 0) << '\n';
            }
        }
        if (args.vlsm_out) {
            auto out = open_out(*args.vlsm_out);
            write_matrix_csv(m, m.vlsmp, out);
        }
        json summary = base_report("site");
        summary["status"] = "ok";
        summary["network"] = args.network.filename().string();
        summary["n_node"] = net->n_node();
        summary["alpha"] = cfg.siting.alpha;
        summary["beta"] = cfg.siting.beta;
        summary["der_buses"] = cfg.siting.der_buses;
        summary["excluded_buses"] = cfg.siting.excluded_buses;
        summary["r_used"] = res.r_used;
        summary["delta_p_kw"] = cfg.vlsm.delta_p_kw;
        summary["selected_bus"] = res.selected_bus;
        const auto it = std::find_if(res.per_bus.begin(), res.per_bus.end(),
                                     [&](const SitingRow& r) { return r.bus_id == res.selected_bus; });
        summary["selected_c_value"] = it->c_value;
        summary["siting_csv"] = args.out.filename().string();
        write_json(summary_path_for(args.out), summary);
        log << "selected connection bus: " << res.selected_bus << '\n';
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

int run_simulate(const SimulateArgs& args, std::ostream& log, std::ostream& err) {
    try {
        const auto cfg = config_or_default(args.config);
        const auto p1 = load_profile_csv(args.feeder1, cfg.feeder1_backfeed_kw);
        const auto p2 = load_profile_csv(args.feeder2, cfg.feeder2_backfeed_kw);
        const auto r = simulate_transfer(p1, p2, ConverterSpec{args.size_kva, cfg.efficiency}, cfg.savings_rule);
        auto out = open_out(args.out);
        out << "index,net1_kw,net2_kw,p_c_12_kw,p_c_21_kw,net1_after_kw,net2_after_kw,save1_kw,save2_kw\n";
        for (std::size_t t = 0; t < p1.size(); ++t) {
            out << t << ',' << format_number(p1.load()[t] - p1.der()[t]) << ','
                << format_number(p2.load()[t] - p2.der()[t]) << ',' << format_number(r.p_c_12[t]) << ','
                << format_number(r.p_c_21[t]) << ',' << format_number(r.net1_after[t]) << ','
                << format_number(r.net2_after[t]) << ',' << format_number(r.save1[t]) << ','
                << format_number(r.save2[t]) << '\n';
        }
        log << "E_save1 = " << format_number(r.e_save1_kwh) << " kWh, E_save2 = " << format_number(r.e_save2_kwh)
            << " kWh\n";
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace b2b::cli
