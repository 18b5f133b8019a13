// archivist: operator CLI for the image archive.
//
//   archivist init-admin   --data-dir DIR --user-id ID
//   archivist serve        [--config FILE]
//   archivist seed-demo    --data-dir DIR [--patients N] [--scans M] [--seed S]
//   archivist export-audit --data-dir DIR --out FILE [--from T] [--to T]
//
// The admin password comes from ARCHIVIST_ADMIN_PASSWORD or a prompt, never
// from a flag.

#include <pthread.h>
#include <signal.h>
#include <termios.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <thread>

#include "archivist/api/config.hpp"
#include "archivist/api/server.hpp"
#include "archivist/archive/archive_service.hpp"
#include "archivist/archive/bootstrap.hpp"
#include "archivist/auth/auth_service.hpp"
#include "archivist/cli/commands.hpp"
#include "archivist/crypto.hpp"
#include "archivist/search/search.hpp"

namespace fs = std::filesystem;
using namespace archivist;

namespace {

bool verbose = false;

void note(const std::string& line) {
    if (verbose) std::cerr << line << '\n';
}

int fail(const Error& e) {
    std::cerr << "archivist: " << e.what() << '\n';
    return cli::exit_code_for(e);
}

std::string read_line_quietly(const char* prompt) {
    const bool tty = ::isatty(STDIN_FILENO) != 0;
    termios saved{};
    if (tty) {
        std::cerr << prompt << std::flush;
        ::tcgetattr(STDIN_FILENO, &saved);
        termios quiet = saved;
        quiet.c_lflag &= static_cast<tcflag_t>(~ECHO);
        ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
    }
    std::string line;
    std::getline(std::cin, line);
    if (tty) {
        ::tcsetattr(STDIN_FILENO, TCSANOW, &saved);
        std::cerr << '\n';
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::string admin_password() {
    if (const char* env = std::getenv("ARCHIVIST_ADMIN_PASSWORD"); env != nullptr && *env != '\0') {
        note("password taken from ARCHIVIST_ADMIN_PASSWORD");
        return env;
    }
    std::string first = read_line_quietly("Administrator password: ");
    if (::isatty(STDIN_FILENO) != 0) {
        std::string second = read_line_quietly("Repeat password: ");
        const bool same = first == second;
        crypto::cleanse(second);
        if (!same) {
            crypto::cleanse(first);
            throw Error(ErrorCode::BadRequest, "passwords do not match");
        }
    }
    return first;
}

int init_admin(const fs::path& data_dir, const std::string& user_id) {
    try {
        storage::StoreOptions options;
        auto store = storage::Store::open(data_dir, options);
        if (store->read([](const storage::Reader& r) { return is_initialized(r); })) {
            throw Error(ErrorCode::AlreadyInitialized, "archive already has accounts; init-admin refused");
        }
        std::string password = admin_password();
        try {
            const auto result = initialize_archive(*store, user_id, password, system_now());
            crypto::cleanse(password);
            store->close();
            std::cout << "initialized archive; administrator " << result.admin_user_id << '\n';
        } catch (...) {
            crypto::cleanse(password);
            throw;
        }
        return cli::kExitOk;
    } catch (const Error& e) {
        return fail(e);
    }
}

int serve(const std::optional<fs::path>& config_path) {
    api::ServiceConfig config;
    try {
        config = api::load_config(config_path, api::environment_overrides());
    } catch (const Error& e) {
        std::cerr << "archivist: " << e.what() << '\n';
        return cli::kExitFailure;
    }

    // Termination signals are taken by a dedicated thread; every other thread
    // (including httplib's workers) inherits the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto port_in_use = [&] {
        std::cerr << "archivist: cannot listen on " << config.listen_address << ":" << config.listen_port
                  << " (port in use?)\n";
        return cli::kExitPortInUse;
    };
    // Checked before the store is opened, so a second instance on the same
    // data directory reports the port rather than the store lock.
    if (!api::Server::port_available(config.listen_address, config.listen_port)) return port_in_use();

    try {
        storage::StoreOptions so;
        so.max_image_bytes = config.max_image_bytes;
        auto store = cli::open_initialized(config.data_dir, so);
        auth::AuthOptions ao;
        ao.session_ttl = std::chrono::minutes(config.session_ttl_minutes);
        auth::AuthService auth(*store, ao);
        ArchiveService archive(*store);
        search::SearchService search(*store);

        api::ServerOptions options;
        options.max_image_bytes = config.max_image_bytes;
        options.banner = config.bootstrap_banner;
        if (verbose) options.access_log = [](const std::string& line) { std::cerr << line << '\n'; };
        api::Server server(api::Services{*store, auth, archive, search}, options);

        const int port = server.bind(config.listen_address, config.listen_port);
        if (port < 0) return port_in_use();
        std::cout << config.bootstrap_banner << " listening on " << config.listen_address << ":" << port
                  << std::endl;

        std::atomic<bool> stopping{false};
        std::thread watcher([&] {
            int sig = 0;
            sigwait(&signals, &sig);
            stopping = true;
            server.stop();
        });
        server.listen();
        if (!stopping) ::kill(::getpid(), SIGTERM);
        watcher.join();
        store->close();
        std::cout << "stopped" << std::endl;
        return cli::kExitOk;
    } catch (const Error& e) {
        return fail(e);
    }
}

int seed_demo(const fs::path& data_dir, const cli::SeedOptions& options) {
    try {
        storage::StoreOptions so;
        so.sync_writes = false;
        auto store = cli::open_initialized(data_dir, so);
        const auto summary = cli::seed_demo(*store, options);
        // close() checkpoints, which is what makes the unsynced writes durable.
        store->close();
        if (summary.already_present) {
            std::cout << "demo data for seed " << options.seed << " already present; nothing written\n";
        } else {
            std::cout << "seeded " << summary.patients << " patients and " << summary.scans << " scans\n";
        }
        return cli::kExitOk;
    } catch (const Error& e) {
        return fail(e);
    }
}

std::optional<Timestamp> parse_time_flag(const std::string& text, const char* flag) {
    if (text.empty()) return std::nullopt;
    auto t = parse_rfc3339(text);
    if (!t) throw Error(ErrorCode::BadRequest, std::string(flag) + " must be an RFC 3339 timestamp");
    return t;
}

int export_audit(const fs::path& data_dir, const fs::path& out_path, const std::string& from,
                 const std::string& to) {
    try {
        auth::AuditFilter filter;
        filter.from = parse_time_flag(from, "--from");
        filter.to = parse_time_flag(to, "--to");
        auto store = cli::open_initialized(data_dir);
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + out_path.string() + " for writing");
        const auto n = cli::export_audit(*store, filter, out);
        out.flush();
        if (!out) throw Error(ErrorCode::IoFailure, "write to " + out_path.string() + " failed");
        note("exported " + std::to_string(n) + " entries");
        return cli::kExitOk;
    } catch (const Error& e) {
        return fail(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"archivist: medical image archive"};
    app.require_subcommand(1);
    app.add_flag("-v,--verbose", verbose, "Log progress and requests to stderr");

    fs::path data_dir;
    std::string user_id = "admin";
    auto* init = app.add_subcommand("init-admin", "Create the first Administrator and seed data");
    init->add_option("--data-dir", data_dir, "Archive data directory")->required();
    init->add_option("--user-id", user_id, "Administrator user id")->capture_default_str();

    std::string config_path;
    auto* srv = app.add_subcommand("serve", "Run the HTTP API");
    srv->add_option("--config", config_path, "key=value config file");

    cli::SeedOptions seed;
    auto* demo = app.add_subcommand("seed-demo", "Generate synthetic patients and scans");
    demo->add_option("--data-dir", data_dir, "Archive data directory")->required();
    demo->add_option("--patients", seed.patients, "Number of patients")->capture_default_str();
    demo->add_option("--scans", seed.scans, "Number of scans")->capture_default_str();
    demo->add_option("--seed", seed.seed, "Random seed")->capture_default_str();

    fs::path out_path;
    std::string from, to;
    auto* exp = app.add_subcommand("export-audit", "Write the audit trail as JSON lines");
    exp->add_option("--data-dir", data_dir, "Archive data directory")->required();
    exp->add_option("--out", out_path, "Output file")->required();
    exp->add_option("--from", from, "Earliest timestamp, inclusive (RFC 3339)");
    exp->add_option("--to", to, "Latest timestamp, exclusive (RFC 3339)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return cli::kExitFailure;
    }

    if (*init) return init_admin(data_dir, user_id);
    if (*srv) return serve(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    if (*demo) return seed_demo(data_dir, seed);
    if (*exp) return export_audit(data_dir, out_path, from, to);
    return cli::kExitFailure;
}
