#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace archivist::api {

struct ServiceConfig {
    std::uint16_t listen_port = 8080;
    std::string listen_address = "127.0.0.1";
    std::filesystem::path data_dir = "data";
    std::uint32_t session_ttl_minutes = 30;
    std::uint64_t max_image_bytes = 25ull * 1024 * 1024;
    std::string bootstrap_banner = "archivist";
};

// ARCHIVIST_* variables from the process environment, keyed by the config
// key they override (ARCHIVIST_LISTEN_PORT -> listen_port).
std::map<std::string, std::string> environment_overrides();

// UTF-8 key=value lines; blank lines and lines starting with '#' are
// ignored. A missing file means defaults. env wins over the file. Throws
// ConfigParseError naming the offending key.
ServiceConfig load_config(const std::optional<std::filesystem::path>& path,
                          const std::map<std::string, std::string>& env);

}  // namespace archivist::api
