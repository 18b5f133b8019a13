#pragma once

// The work behind the archivist subcommands, minus argument parsing and
// terminal handling (tools/archivist.cpp).

#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>

#include "archivist/auth/audit.hpp"
#include "archivist/error.hpp"
#include "archivist/storage/store.hpp"

namespace archivist::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitAlreadyInitialized = 2,
    kExitWeakPassword = 3,
    kExitStoreNotInitialized = 4,
    kExitPortInUse = 5,
    kExitIoFailure = 6,
};

int exit_code_for(const Error& e) noexcept;

// Opens an existing store that has been through init-admin. Throws
// StoreNotInitialized otherwise.
std::unique_ptr<storage::Store> open_initialized(const std::filesystem::path& data_dir,
                                                 storage::StoreOptions options = {});

struct SeedOptions {
    std::uint64_t patients = 1000;
    std::uint64_t scans = 3000;
    std::uint64_t seed = 42;
};

struct SeedSummary {
    std::uint64_t patients = 0;
    std::uint64_t scans = 0;
    // The first card number for this seed already existed; nothing written.
    bool already_present = false;
};

// Synthetic patients and scans, a pure function of the options. Acts as the
// store's first Administrator. Card numbers embed the seed, so different
// seeds coexist and a repeated seed is a no-op.
SeedSummary seed_demo(storage::Store& store, const SeedOptions& options);

// One canonical-form AuditEntry per line, log_id order. Returns the count.
std::size_t export_audit(const storage::Store& store, const auth::AuditFilter& filter, std::ostream& out);

}  // namespace archivist::cli
