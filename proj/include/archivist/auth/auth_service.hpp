#pragma once

// Accounts, sessions, roles and the audit trail.
//
// Operations taking an actor re-read the actor's account and role inside the
// same transaction that performs the change, so a revoked privilege cannot
// slip through between check and write.

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "archivist/auth/audit.hpp"
#include "archivist/auth/password.hpp"
#include "archivist/auth/rbac.hpp"
#include "archivist/auth/session.hpp"
#include "archivist/crypto.hpp"
#include "archivist/domain/serialize.hpp"
#include "archivist/storage/store.hpp"

namespace archivist::auth {

inline constexpr std::string_view kLoginErrorMessage =
    "login error, check your password and username";

struct AuthOptions {
    std::chrono::minutes session_ttl{30};
    unsigned password_iterations = kDefaultPasswordIterations;
};

struct Credentials {
    UserId user_id;
    std::string password;

    ~Credentials() { crypto::cleanse(password); }
};

struct LoginResult {
    SessionToken session;
    UserAccount user;
    std::set<PrivilegeName> privileges;
    bool administrator = false;
};

struct RoleChanges {
    std::optional<std::string> role_name;
    std::optional<Status> status;
    std::optional<std::set<PrivilegeName>> privileges;
};

class AuthService {
public:
    explicit AuthService(storage::Store& store, AuthOptions options = {},
                         Clock clock = system_clock());

    const AuthOptions& options() const noexcept { return options_; }
    Timestamp now() const { return clock_(); }

    // Throws Forbidden, DuplicateUserId, WeakPassword, UnknownRole, FieldErrors.
    UserId create_user(const UserAccount& actor, UserAccount candidate,
                       std::string_view initial_password);

    // changes is a partial public-form user object; a "password" member is
    // re-digested. Throws Forbidden, UnknownUser, UnknownRole, WeakPassword,
    // FieldErrors, BadRequest.
    UserAccount update_user(const UserAccount& actor, std::string_view user_id, const Json& changes);

    std::vector<UserAccount> list_users(const UserAccount& actor) const;

    // Every failure is LoginError with kLoginErrorMessage.
    LoginResult login(const Credentials& c);
    LoginResult login(const Credentials& c, Timestamp now);

    // Unknown tokens are a no-op.
    void logout(std::string_view token);
    void logout(std::string_view token, Timestamp now);

    // Throws InvalidSession.
    UserAccount resolve_session(std::string_view token) const;
    UserAccount resolve_session(std::string_view token, Timestamp now) const;

    // Creates, or replaces the privilege set of, the role with this name
    // (matched case-insensitively). description is accepted for form parity
    // but the role table has no column for it. Throws Forbidden,
    // CannotModifyAdministrator.
    Role create_or_update_role(const UserAccount& actor, std::string_view role_name,
                               std::string_view description,
                               const std::set<PrivilegeName>& privileges);

    // Throws Forbidden, UnknownRole, CannotModifyAdministrator.
    Role update_role(const UserAccount& actor, std::string_view role_id, const RoleChanges& changes);

    std::vector<Role> list_roles(const UserAccount& actor) const;

    // Throws Forbidden, UnknownUser, UnknownRole.
    void assign_role(const UserAccount& actor, std::string_view user_id, std::string_view role_id);

    bool check_privilege(const UserAccount& user, PrivilegeName p) const;
    std::set<PrivilegeName> privileges_of(const UserAccount& user) const;
    bool is_administrator(const UserAccount& user) const;

    AuditEntry append_audit(std::string_view actor_id, std::string_view event_description);
    AuditEntry append_audit(std::string_view actor_id, std::string_view event_description,
                            Timestamp now);

    // Throws Forbidden.
    std::vector<AuditEntry> query_audit(const UserAccount& actor, const AuditFilter& filter = {}) const;

private:
    storage::Store& store_;
    AuthOptions options_;
    Clock clock_;
    SessionRegistry sessions_;
    // Verified against when the user id is unknown so both paths cost the same.
    std::string dummy_digest_;
};

// Sets privilege rows for role_id to exactly the given set.
void set_role_privileges(storage::Transaction& tx, const RoleId& role_id,
                         const std::set<PrivilegeName>& privileges);

}  // namespace archivist::auth
