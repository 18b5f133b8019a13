#include "archivist/api/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <string_view>

#include "archivist/error.hpp"

extern char** environ;

namespace archivist::api {

namespace {

constexpr std::string_view kEnvPrefix = "ARCHIVIST_";

constexpr std::string_view kKeys[] = {"listen_port",  "listen_address",  "data_dir",
                                      "session_ttl_minutes", "max_image_bytes", "bootstrap_banner"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::ConfigParseError, "invalid config value for " + key + ": " + why, key);
}

std::uint64_t parse_unsigned(const std::string& key, std::string_view text, std::uint64_t max) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || p != end) bad(key, "expected a non-negative integer");
    if (v > max) bad(key, "out of range");
    return v;
}

// "port" is accepted as shorthand for listen_port.
std::string canonical_key(std::string_view key) {
    if (key == "port") return "listen_port";
    return std::string(key);
}

void apply(ServiceConfig& cfg, const std::string& key, std::string_view raw) {
    const auto value = trim(raw);
    if (key == "listen_port") {
        cfg.listen_port = static_cast<std::uint16_t>(parse_unsigned(key, value, 65535));
    } else if (key == "listen_address") {
        if (value.empty()) bad(key, "must not be empty");
        cfg.listen_address = std::string(value);
    } else if (key == "data_dir") {
        if (value.empty()) bad(key, "must not be empty");
        cfg.data_dir = std::string(value);
    } else if (key == "session_ttl_minutes") {
        const auto v = parse_unsigned(key, value, 60ull * 24 * 365);
        if (v == 0) bad(key, "must be positive");
        cfg.session_ttl_minutes = static_cast<std::uint32_t>(v);
    } else if (key == "max_image_bytes") {
        const auto v = parse_unsigned(key, value, std::numeric_limits<std::uint32_t>::max());
        if (v == 0) bad(key, "must be positive");
        cfg.max_image_bytes = v;
    } else if (key == "bootstrap_banner") {
        cfg.bootstrap_banner = std::string(value);
    } else {
        bad(key, "unknown key");
    }
}

}  // namespace

std::map<std::string, std::string> environment_overrides() {
    std::map<std::string, std::string> out;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string_view entry(*e);
        if (entry.substr(0, kEnvPrefix.size()) != kEnvPrefix) continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        std::string key(entry.substr(kEnvPrefix.size(), eq - kEnvPrefix.size()));
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        // Other ARCHIVIST_ variables (the admin password, say) belong to the CLI.
        bool known = key == "port";
        for (auto k : kKeys) known = known || key == k;
        if (known) out[canonical_key(key)] = std::string(entry.substr(eq + 1));
    }
    return out;
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& path,
                          const std::map<std::string, std::string>& env) {
    ServiceConfig cfg;
    if (path && std::filesystem::exists(*path)) {
        std::ifstream in(*path, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoFailure, "cannot read config file");
        std::set<std::string> seen;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto text = trim(line);
            if (text.empty() || text.front() == '#') continue;
            const auto eq = text.find('=');
            if (eq == std::string_view::npos) {
                const auto where = "line " + std::to_string(line_no);
                throw Error(ErrorCode::ConfigParseError, "config " + where + " is not key=value", where);
            }
            const auto key = canonical_key(trim(text.substr(0, eq)));
            if (!seen.insert(key).second) bad(key, "given twice");
            apply(cfg, key, text.substr(eq + 1));
        }
    }
    for (const auto& [key, value] : env) apply(cfg, canonical_key(key), value);
    return cfg;
}

}  // namespace archivist::api
