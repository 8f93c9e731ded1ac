#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace b2b::cli {

/// Process exit codes; stable for scripting.
enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kUneconomic = 2,
    kNumericalFailure = 3,
};

struct SizeArgs {
    std::filesystem::path feeder1;
    std::filesystem::path feeder2;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::optional<unsigned> threads;
};

struct PairArgs {
    std::optional<std::filesystem::path> dir;
    std::size_t top = 5;
    bool study = false;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::optional<unsigned> threads;
};

struct SiteArgs {
    std::filesystem::path network;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::optional<std::filesystem::path> vlsm_out;
};

struct SimulateArgs {
    std::filesystem::path feeder1;
    std::filesystem::path feeder2;
    std::optional<std::filesystem::path> config;
    double size_kva = 0.0;
    std::filesystem::path out;
};

// Each command writes its artefacts, prints a short summary to `log`, and
// returns an ExitCode. Errors are reported on `err`; nothing throws.
int run_size(const SizeArgs& args, std::ostream& log, std::ostream& err);
int run_pair(const PairArgs& args, std::ostream& log, std::ostream& err);
int run_site(const SiteArgs& args, std::ostream& log, std::ostream& err);
int run_simulate(const SimulateArgs& args, std::ostream& log, std::ostream& err);

/// Companion paths derived from a report path: `<stem>_curves.csv`, `<stem>.json`.
std::filesystem::path curves_path_for(const std::filesystem::path& report);
std::filesystem::path summary_path_for(const std::filesystem::path& siting_csv);

}  // namespace b2b::cli
