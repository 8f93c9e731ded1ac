#include "b2bplan/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "b2bplan/error.hpp"

namespace b2b {

void PlanConfig::validate() const {
    economics.validate();
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("converter efficiency must lie in (0, 1]");
    if (size_grid.points().size() < 4) throw InvalidArgument("size grid needs at least 4 points");
    if (feeder1_backfeed_kw < 0.0 || feeder2_backfeed_kw < 0.0) throw InvalidArgument("back-feed limits must be nonnegative");
    if (!(reference_size_kva >= 0.0)) throw InvalidArgument("reference size must be nonnegative");
}

PlanConfig parse_config_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    PlanConfig c;
    try {
        if (j.contains("schema_version") && j["schema_version"].get<int>() != kSchemaVersion) {
            throw ParseError("config JSON: unsupported schema_version " + j["schema_version"].dump());
        }
        if (auto it = j.find("economics"); it != j.end()) {
            auto& e = c.economics;
            e.lambda_pv = it->value("lambda_pv", e.lambda_pv);
            e.lambda_c = it->value("lambda_c", e.lambda_c);
            e.lambda_cm = it->value("lambda_cm", e.lambda_cm);
            e.n_yr = it->value("n_yr", e.n_yr);
            e.p1_limit = it->value("p1_limit", e.p1_limit);
            e.p2_limit = it->value("p2_limit", e.p2_limit);
        }
        if (auto it = j.find("converter"); it != j.end()) {
            c.efficiency = it->value("efficiency", c.efficiency);
            if (auto g = it->find("size_grid"); g != it->end()) {
                c.size_grid.min_kva = g->value("min_kva", c.size_grid.min_kva);
                c.size_grid.max_kva = g->value("max_kva", c.size_grid.max_kva);
                c.size_grid.step_kva = g->value("step_kva", c.size_grid.step_kva);
            }
            if (it->value("cap_savings_by_curtailment", false)) c.savings_rule = SavingsRule::curtailment_capped;
        }
        if (auto it = j.find("backfeed_limits"); it != j.end()) {
            c.feeder1_backfeed_kw = it->value("feeder1_kw", c.feeder1_backfeed_kw);
            c.feeder2_backfeed_kw = it->value("feeder2_kw", c.feeder2_backfeed_kw);
        }
        if (auto it = j.find("siting"); it != j.end()) {
            auto& s = c.siting;
            s.alpha = it->value("alpha", s.alpha);
            s.beta = it->value("beta", s.beta);
            s.der_buses = it->value("der_buses", s.der_buses);
            s.excluded_buses = it->value("excluded_buses", s.excluded_buses);
            if (auto r = it->find("r"); r != it->end()) {
                if (r->is_number()) {
                    s.r_explicit = r->get<double>();
                } else if (!(r->is_string() && r->get<std::string>() == "auto")) {
                    throw ParseError("config JSON: siting.r must be \"auto\" or a number");
                }
            }
            c.vlsm.delta_p_kw = it->value("delta_p_kw", c.vlsm.delta_p_kw);
            c.vlsm.delta_q_kvar = it->value("delta_q_kvar", c.vlsm.delta_q_kvar);
        }
        if (auto it = j.find("pairing"); it != j.end()) {
            c.reference_size_kva = it->value("reference_size_kva", c.reference_size_kva);
            c.seed = it->value("seed", c.seed);
        }
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    return c;
}

PlanConfig load_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_json(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void apply_seed_override(PlanConfig& cfg) {
    const char* env = std::getenv("B2BPLAN_SEED");
    if (env == nullptr || *env == '\0') return;
    std::uint64_t seed = 0;
    const std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError("B2BPLAN_SEED is not an unsigned integer: '" + std::string(text) + "'");
    }
    cfg.seed = seed;
}

StudyConfig study_config(const PlanConfig& cfg) {
    StudyConfig s;
    s.seed = cfg.seed;
    s.reference_size_kva = cfg.reference_size_kva;
    s.efficiency = cfg.efficiency;
    s.threads = cfg.threads;
    return s;
}

}  // namespace b2b
