// output.hpp: Run directory writer, CSV formatting and the run manifest

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qsid::cli {

inline constexpr const char* kVersion = "0.1.0";

// {:.17g}: parses back to exactly `v`.
std::string format_number(double v);

// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(std::string_view s);

std::string sha256_hex(std::string_view data);

// Collects every file of one run; all writes go through here so the manifest
// lists each file exactly once.
class RunWriter {
public:
    RunWriter(std::filesystem::path dir, std::string command);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    void write(const std::string& name, const std::string& content);
    // Writes manifest.json; `config_text` is the effective configuration.
    void finish(const std::string& config_text, int exit_code, const std::string& error = {});

private:
    struct Entry {
        std::string name;
        std::size_t bytes = 0;
        std::string sha256;
    };
    std::filesystem::path dir_;
    std::string command_;
    std::vector<Entry> files_;
    std::chrono::system_clock::time_point started_;
    std::chrono::steady_clock::time_point started_steady_;
};

} // namespace qsid::cli
