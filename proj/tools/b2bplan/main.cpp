#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace b2b::cli;

    CLI::App app{"b2bplan: back-to-back converter sizing, feeder pairing and siting"};
    app.require_subcommand(1);

    SizeArgs size;
    std::string size_cfg;
    unsigned size_threads = 0;
    auto* size_cmd = app.add_subcommand("size", "Select the converter size for a feeder pair");
    size_cmd->add_option("--feeder1", size.feeder1, "Feeder 1 profile CSV")->required()->check(CLI::ExistingFile);
    size_cmd->add_option("--feeder2", size.feeder2, "Feeder 2 profile CSV")->required()->check(CLI::ExistingFile);
    size_cmd->add_option("--config", size_cfg, "Plan config JSON")->check(CLI::ExistingFile);
    size_cmd->add_option("--out", size.out, "Report JSON path")->required();
    size_cmd->add_option("--threads", size_threads, "Worker threads for the size sweep");

    PairArgs pair;
    std::string pair_dir, pair_cfg;
    unsigned pair_threads = 0;
    auto* pair_cmd = app.add_subcommand("pair", "Rank feeder pairs by the load standard-deviation criterion");
    pair_cmd->add_option("--dir", pair_dir, "Directory of profile CSVs")->check(CLI::ExistingDirectory);
    pair_cmd->add_option("--top", pair.top, "Number of pairs to keep")->capture_default_str();
    pair_cmd->add_flag("--study", pair.study, "Run the 24-scenario synthetic study instead");
    pair_cmd->add_option("--config", pair_cfg, "Plan config JSON")->check(CLI::ExistingFile);
    pair_cmd->add_option("--out", pair.out, "Output CSV path")->required();
    pair_cmd->add_option("--threads", pair_threads, "Worker threads for the study");

    SiteArgs site;
    std::string site_cfg, site_vlsm;
    auto* site_cmd = app.add_subcommand("site", "Select the converter connection bus on a feeder");
    site_cmd->add_option("--network", site.network, "Network JSON")->required()->check(CLI::ExistingFile);
    site_cmd->add_option("--config", site_cfg, "Plan config JSON")->check(CLI::ExistingFile);
    site_cmd->add_option("--out", site.out, "Per-bus siting CSV path")->required();
    site_cmd->add_option("--vlsm-out", site_vlsm, "Also write the VLSMP matrix CSV");

    SimulateArgs sim;
    std::string sim_cfg;
    auto* sim_cmd = app.add_subcommand("simulate", "Trace the power transfer for one converter size");
    sim_cmd->add_option("--feeder1", sim.feeder1, "Feeder 1 profile CSV")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--feeder2", sim.feeder2, "Feeder 2 profile CSV")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--config", sim_cfg, "Plan config JSON")->check(CLI::ExistingFile);
    sim_cmd->add_option("--size", sim.size_kva, "Converter size, kVA")->required()->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--out", sim.out, "Trace CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    if (*size_cmd) {
        if (!size_cfg.empty()) size.config = size_cfg;
        if (size_threads > 0) size.threads = size_threads;
        return run_size(size, std::cout, std::cerr);
    }
    if (*pair_cmd) {
        if (!pair_dir.empty()) pair.dir = pair_dir;
        if (!pair_cfg.empty()) pair.config = pair_cfg;
        if (pair_threads > 0) pair.threads = pair_threads;
        return run_pair(pair, std::cout, std::cerr);
    }
    if (*site_cmd) {
        if (!site_cfg.empty()) site.config = site_cfg;
        if (!site_vlsm.empty()) site.vlsm_out = site_vlsm;
        return run_site(site, std::cout, std::cerr);
    }
    if (!sim_cfg.empty()) sim.config = sim_cfg;
    return run_simulate(sim, std::cout, std::cerr);
}
