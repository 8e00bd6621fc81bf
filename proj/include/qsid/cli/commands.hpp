// commands.hpp: simulate, identify, guess, spectrum and gradcheck

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace qsid::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitNonFinite = 4,
};

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> starts;   // keep the first n starts
    std::optional<std::uint64_t> seed;   // overrides noise.seed
    bool quiet = false;
};

// Output directory: --out, else io.output_dir (relative to $QSID_OUTPUT_ROOT
// when set), else <root>/<config stem>-<command> with root = $QSID_OUTPUT_ROOT
// or ./runs.
std::filesystem::path resolve_output_dir(const RunOptions& options, const std::string& command,
                                         const std::optional<std::filesystem::path>& configured);

// Runs one subcommand; errors are reported on `err` and mapped to ExitCode.
int run_command(const std::string& command, const RunOptions& options, std::ostream& err);

} // namespace qsid::cli
