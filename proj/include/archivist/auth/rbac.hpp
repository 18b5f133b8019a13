#pragma once

// Privilege checks evaluated against whatever state the reader sees. Nothing
// is cached, so a role change is visible to the very next check.

#include <array>
#include <optional>
#include <set>
#include <string_view>

#include "archivist/domain/types.hpp"
#include "archivist/storage/store.hpp"

namespace archivist::auth {

enum class PrivilegeName { Patients, PatientImages, ManageUsers, News };

inline constexpr std::array<PrivilegeName, 4> kAllPrivileges = {
    PrivilegeName::Patients, PrivilegeName::PatientImages, PrivilegeName::ManageUsers,
    PrivilegeName::News};

// "patients", "patient images", "manage users", "news": the
// privilege_description of the seeded Privilege records.
std::string_view label(PrivilegeName p) noexcept;
std::optional<PrivilegeName> parse_privilege(std::string_view label) noexcept;

// The Privilege record backing p, matched on its description.
std::optional<Privilege> privilege_record(const storage::Reader& r, PrivilegeName p);

// Role plus its privilege_ids assembled from role_privileges rows.
std::optional<Role> load_role(const storage::Reader& r, std::string_view role_id);
std::optional<Role> find_role_by_name(const storage::Reader& r, std::string_view role_name);

// Allow iff the user's role is Enabled, the role holds p, and p's Privilege
// record is Enabled. A user without a role holds nothing.
bool check_privilege(const storage::Reader& r, const UserAccount& user, PrivilegeName p);
std::set<PrivilegeName> granted_privileges(const storage::Reader& r, const UserAccount& user);
bool is_administrator(const storage::Reader& r, const UserAccount& user);

// Re-reads the actor's account so a disabled or deleted account holds
// nothing. Throws Forbidden.
UserAccount require(const storage::Reader& r, std::string_view actor_id, PrivilegeName p);
UserAccount require_administrator(const storage::Reader& r, std::string_view actor_id,
                                  std::optional<PrivilegeName> p = std::nullopt);

}  // namespace archivist::auth
