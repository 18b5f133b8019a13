#pragma once

// HTTP/1.1 + JSON front end. Plain HTTP only; TLS belongs to a reverse proxy
// in front of it.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "archivist/archive/archive_service.hpp"
#include "archivist/auth/auth_service.hpp"
#include "archivist/search/search.hpp"
#include "archivist/storage/store.hpp"

namespace archivist::api {

struct ServerOptions {
    std::uint64_t max_image_bytes = storage::kDefaultMaxImageBytes;
    std::string banner = "archivist";
    // One line per request: method, path, status, request id. Never bodies.
    std::function<void(const std::string&)> access_log;
};

struct Services {
    storage::Store& store;
    auth::AuthService& auth;
    ArchiveService& archive;
    search::SearchService& search;
};

class Server {
public:
    Server(Services services, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Port 0 picks a free port. Returns the bound port, or -1 when the
    // address is taken or unusable.
    int bind(const std::string& host, int port);
    // Serves until stop(). In-flight requests finish before it returns.
    bool listen();
    void stop();
    bool is_running() const;
    void wait_until_ready() const;

    // Whether host:port can be bound right now (with the same socket options
    // bind() uses). Port 0 is always bindable.
    static bool port_available(const std::string& host, int port);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace archivist::api
