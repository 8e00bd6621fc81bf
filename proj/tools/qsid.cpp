// qsid: command-line front end

#include <iostream>

#include "CLI11.hpp"

#include "qsid/cli/commands.hpp"
#include "qsid/cli/output.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Lindblad simulation and trace-matching parameter identification"};
    app.set_version_flag("--version", qsid::cli::kVersion);
    app.require_subcommand(1);

    qsid::cli::RunOptions options;
    std::string config;
    std::string out;
    std::size_t starts = 0;
    std::uint64_t seed = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "Simulate the truth model and write the observable trace"},
        {"identify", "Fit the unknown parameters by gradient descent from every start"},
        {"guess", "DFT of the measured trace, peaks, and ancilla frequency guesses"},
        {"spectrum", "Sample the Lorentzian noise spectrum of a set of ancillas"},
        {"gradcheck", "Compare paper, exact and finite-difference gradients"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config, "Experiment configuration (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out, "Output directory");
        sub->add_option("--starts", starts, "Use only the first n starts")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Override noise.seed");
        sub->add_flag("-q,--quiet", options.quiet, "Suppress progress messages");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qsid::cli::kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    options.config = config;
    if (sub->count("--out")) options.out = out;
    if (sub->count("--starts")) options.starts = starts;
    if (sub->count("--seed")) options.seed = seed;
    return qsid::cli::run_command(sub->get_name(), options, std::cerr);
}
