#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace archivist::storage {

enum class EntityKind {
    Patient,
    Scan,
    ScanCategory,
    UserAccount,
    Role,
    Privilege,
    RolePrivilege,
    AuditEntry,
};

inline constexpr std::array<EntityKind, 8> kAllKinds = {
    EntityKind::Patient,   EntityKind::Scan,          EntityKind::ScanCategory,
    EntityKind::UserAccount, EntityKind::Role,        EntityKind::Privilege,
    EntityKind::RolePrivilege, EntityKind::AuditEntry,
};

struct UniqueKey {
    std::vector<std::string_view> fields;
    bool case_insensitive = false;
};

struct ForeignKey {
    std::string_view field;
    EntityKind target;
    bool nullable = false;
};

// Static description of one collection: its fields, generated-id scheme and
// integrity constraints. Storage enforces all of these on every commit.
struct KindSchema {
    EntityKind kind;
    // Directory and export file stem, e.g. "patients".
    std::string_view name;
    std::string_view id_field;
    // Prefix for generated string ids ("P-" -> "P-1"); empty when the caller
    // always supplies the id (user accounts) or the id is an integer.
    std::string_view id_prefix;
    bool integer_id = false;
    bool caller_assigned_id = false;
    // Append-only: no updates, no deletes.
    bool immutable = false;
    bool deletable = true;
    std::vector<std::string_view> fields;
    std::vector<UniqueKey> unique;
    std::vector<ForeignKey> foreign_keys;
    // Fields holding a BlobRef (or null) that must point at a stored blob.
    std::vector<std::string_view> blob_fields;
};

const KindSchema& schema(EntityKind kind);
std::string_view kind_name(EntityKind kind) noexcept;
std::optional<EntityKind> parse_kind(std::string_view name) noexcept;
constexpr std::size_t kind_index(EntityKind kind) noexcept { return static_cast<std::size_t>(kind); }

}  // namespace archivist::storage
