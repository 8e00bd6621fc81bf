// output.cpp: CSV helpers, SHA-256 and manifest.json

#include "qsid/cli/output.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace qsid::cli {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

RunWriter::RunWriter(std::filesystem::path dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)), started_(std::chrono::system_clock::now()),
      started_steady_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(dir_);
}

void RunWriter::write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
    for (auto& f : files_)
        if (f.name == name) {
            f = {name, content.size(), sha256_hex(content)};
            return;
        }
    files_.push_back({name, content.size(), sha256_hex(content)});
}

namespace {
std::string utc(std::chrono::system_clock::time_point t) {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
}
} // namespace

void RunWriter::finish(const std::string& config_text, int exit_code, const std::string& error) {
    const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_steady_).count();
    nlohmann::ordered_json m;
    m["artifact"] = "qsid";
    m["version"] = kVersion;
    m["command"] = command_;
    m["config_sha256"] = sha256_hex(config_text);
    m["started_utc"] = utc(started_);
    m["finished_utc"] = utc(std::chrono::system_clock::now());
    m["wall_seconds"] = seconds;
    m["exit_code"] = exit_code;
    if (!error.empty()) m["error"] = error;
    m["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files_) m["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    std::ofstream out(dir_ / "manifest.json", std::ios::trunc);
    out << m.dump(2) << "\n";
}

} // namespace qsid::cli
