#pragma once

// Entity types for the archive's eight tables. Field names match the
// canonical snake_case wire form one-to-one.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "archivist/domain/time.hpp"

namespace archivist {

using PatientId = std::string;
using ScanId = std::string;
using CategoryId = std::string;
using UserId = std::string;
using RoleId = std::string;
using PrivilegeId = std::string;

enum class Sex { Female, Male, Unspecified };
enum class AccountStatus { Active, Disabled };
// Shared by Role and Privilege records.
enum class Status { Enabled, Disabled };

std::string_view to_string(Sex s) noexcept;
std::string_view to_string(AccountStatus s) noexcept;
std::string_view to_string(Status s) noexcept;
std::optional<Sex> parse_sex(std::string_view s) noexcept;
std::optional<AccountStatus> parse_account_status(std::string_view s) noexcept;
std::optional<Status> parse_status(std::string_view s) noexcept;

// Reference to content in the blob store. `digest` is the lowercase hex
// SHA-256 of the bytes.
struct BlobRef {
    std::string digest;
    std::uint64_t size_bytes = 0;
    std::string media_type;

    bool operator==(const BlobRef&) const = default;
};

struct PatientRecord {
    PatientId patient_id;
    std::string first_name;
    std::string last_name;
    std::string address;
    std::string phone;
    std::string email;
    Sex sex = Sex::Unspecified;
    std::string card_number;
    std::optional<BlobRef> photo;

    bool operator==(const PatientRecord&) const = default;
};

struct ScanCategory {
    CategoryId category_id;
    std::string category_name;
    std::string category_description;

    bool operator==(const ScanCategory&) const = default;
};

struct ScanRecord {
    ScanId scan_id;
    PatientId patient_id;
    CategoryId scan_category_id;
    std::string radiographer;
    BlobRef scan_image;
    Timestamp scan_timestamp{};
    std::optional<Timestamp> expiry;
    std::string scan_details;
    // Radiographer's findings.
    std::string comments;

    bool operator==(const ScanRecord&) const = default;
};

struct UserAccount {
    UserId user_id;
    std::string password_digest;
    std::string title;
    std::string first_name;
    std::string last_name;
    Sex sex = Sex::Unspecified;
    std::string phone;
    std::string email;
    std::string address;
    std::optional<BlobRef> photo;
    std::string user_profession;
    AccountStatus account_status = AccountStatus::Active;
    std::optional<RoleId> role_id;

    bool operator==(const UserAccount&) const = default;
};

struct Privilege {
    PrivilegeId privilege_id;
    std::string privilege_description;
    Status status = Status::Enabled;

    bool operator==(const Privilege&) const = default;
};

// privilege_ids is assembled from ROLE_PRIVILEGES rows; the stored ROLE row
// carries only id, name and status.
struct Role {
    RoleId role_id;
    std::string role_name;
    Status status = Status::Enabled;
    std::set<PrivilegeId> privilege_ids;

    bool operator==(const Role&) const = default;
};

struct RolePrivilege {
    std::string sn;
    RoleId role_id;
    PrivilegeId privilege_id;

    bool operator==(const RolePrivilege&) const = default;
};

struct AuditEntry {
    std::int64_t log_id = 0;
    // A user id, or "system" for CLI bootstrap actions.
    UserId user_id;
    std::string event_description;
    Timestamp event_timestamp{};

    bool operator==(const AuditEntry&) const = default;
};

struct SessionToken {
    std::string token;
    UserId user_id;
    Timestamp issued_at{};
    Timestamp expires_at{};

    bool operator==(const SessionToken&) const = default;
};

inline constexpr std::string_view kSystemUserId = "system";
inline constexpr std::string_view kAdministratorRoleName = "Administrator";

}  // namespace archivist
