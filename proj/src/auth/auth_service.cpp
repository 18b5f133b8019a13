#include "archivist/auth/auth_service.hpp"

#include "archivist/domain/validate.hpp"
#include "archivist/error.hpp"

namespace archivist::auth {

using storage::EntityKind;
using storage::Predicate;
using storage::Transaction;

namespace {

Error login_error() { return Error(ErrorCode::LoginError, std::string(kLoginErrorMessage)); }

Error invalid_session() { return Error(ErrorCode::InvalidSession, "invalid or expired session"); }

Error unknown_user(std::string_view id) {
    return Error(ErrorCode::UnknownUser, "no user account " + std::string(id), "user_id");
}

Error unknown_role(std::string_view id) {
    return Error(ErrorCode::UnknownRole, "no role " + std::string(id), "role_id");
}

void require_role_exists(const storage::Reader& r, const std::optional<RoleId>& role_id) {
    if (role_id && !r.contains(EntityKind::Role, *role_id)) throw unknown_role(*role_id);
}

void check_password(std::string_view password) {
    if (!is_strong_enough(password)) {
        throw Error(ErrorCode::WeakPassword,
                    "password must be at least " + std::to_string(kMinPasswordChars) + " characters",
                    "password");
    }
}

Error cannot_modify_administrator() {
    return Error(ErrorCode::CannotModifyAdministrator, "the Administrator role cannot be modified");
}

}  // namespace

void set_role_privileges(Transaction& tx, const RoleId& role_id,
                         const std::set<PrivilegeName>& privileges) {
    std::set<PrivilegeId> wanted;
    for (PrivilegeName p : privileges) {
        auto rec = privilege_record(tx, p);
        if (!rec) {
            throw Error(ErrorCode::BadRequest,
                        "privilege \"" + std::string(label(p)) + "\" is not seeded", "privileges");
        }
        wanted.insert(rec->privilege_id);
    }
    for (const auto& rp : tx.all<RolePrivilege>(EntityKind::RolePrivilege,
                                                Predicate::equals("role_id", role_id))) {
        if (!wanted.erase(rp.privilege_id)) tx.remove(EntityKind::RolePrivilege, rp.sn);
    }
    for (const auto& pid : wanted) {
        tx.save(EntityKind::RolePrivilege, Json(RolePrivilege{"", role_id, pid}));
    }
}

AuthService::AuthService(storage::Store& store, AuthOptions options, Clock clock)
    : store_(store), options_(options), clock_(std::move(clock)) {
    const auto filler = crypto::random_bytes(16);
    dummy_digest_ = hash_password(crypto::to_hex(filler), options_.password_iterations);
}

UserId AuthService::create_user(const UserAccount& actor, UserAccount candidate,
                                std::string_view initial_password) {
    store_.read([&](const storage::Reader& r) { require(r, actor.user_id, PrivilegeName::ManageUsers); });
    candidate = validate_user_account(std::move(candidate));
    check_password(initial_password);
    candidate.password_digest = hash_password(initial_password, options_.password_iterations);

    const Timestamp now = clock_();
    store_.transact([&](Transaction& tx) {
        require(tx, actor.user_id, PrivilegeName::ManageUsers);
        if (tx.contains(EntityKind::UserAccount, candidate.user_id)) {
            throw Error(ErrorCode::DuplicateUserId, "user id already exists", "user_id");
        }
        require_role_exists(tx, candidate.role_id);
        tx.save(EntityKind::UserAccount, Json(candidate));
        auth::append_audit(tx, actor.user_id, "user created: " + candidate.user_id, now);
    });
    return candidate.user_id;
}

UserAccount AuthService::update_user(const UserAccount& actor, std::string_view user_id,
                                     const Json& changes) {
    if (!changes.is_object()) throw Error(ErrorCode::BadRequest, "changes must be a JSON object");
    store_.read([&](const storage::Reader& r) { require(r, actor.user_id, PrivilegeName::ManageUsers); });

    std::optional<std::string> new_digest;
    if (auto pw = changes.find("password"); pw != changes.end()) {
        if (!pw->is_string()) throw Error(ErrorCode::BadRequest, "password must be text", "password");
        std::string password = pw->get<std::string>();
        check_password(password);
        new_digest = hash_password(password, options_.password_iterations);
        crypto::cleanse(password);
    }

    const Timestamp now = clock_();
    return store_.transact([&](Transaction& tx) {
        require(tx, actor.user_id, PrivilegeName::ManageUsers);
        auto current = tx.load(EntityKind::UserAccount, user_id);
        if (!current) throw unknown_user(user_id);

        Json merged = *current;
        for (const auto& [key, value] : changes.items()) {
            if (key == "password") continue;
            if (key == "user_id") {
                if (value != merged.at("user_id")) {
                    throw Error(ErrorCode::BadRequest, "user_id cannot be changed", "user_id");
                }
                continue;
            }
            if (key == "password_digest" || !merged.contains(key)) {
                throw Error(ErrorCode::BadRequest, "unknown field " + key, key);
            }
            merged[key] = value;
        }
        auto updated = validate_user_account(decode<UserAccount>(merged));
        if (new_digest) updated.password_digest = *new_digest;
        require_role_exists(tx, updated.role_id);
        tx.save(EntityKind::UserAccount, Json(updated));
        auth::append_audit(tx, actor.user_id, "update user: " + updated.user_id, now);
        return updated;
    });
}

std::vector<UserAccount> AuthService::list_users(const UserAccount& actor) const {
    return store_.read([&](const storage::Reader& r) {
        require(r, actor.user_id, PrivilegeName::ManageUsers);
        return r.all<UserAccount>(EntityKind::UserAccount);
    });
}

LoginResult AuthService::login(const Credentials& c) { return login(c, clock_()); }

LoginResult AuthService::login(const Credentials& c, Timestamp now) {
    auto user = store_.read([&](const storage::Reader& r) {
        return r.get<UserAccount>(EntityKind::UserAccount, c.user_id);
    });
    const bool matches = verify_password(c.password, user ? user->password_digest : dummy_digest_);
    if (!user || !matches || user->account_status != AccountStatus::Active) throw login_error();

    store_.transact([&](Transaction& tx) {
        auth::append_audit(tx, user->user_id, "login: " + user->user_id, now);
    });
    LoginResult out;
    out.session = sessions_.issue(user->user_id, now, options_.session_ttl);
    store_.read([&](const storage::Reader& r) {
        out.privileges = granted_privileges(r, *user);
        out.administrator = auth::is_administrator(r, *user);
    });
    out.user = std::move(*user);
    return out;
}

void AuthService::logout(std::string_view token) { logout(token, clock_()); }

void AuthService::logout(std::string_view token, Timestamp now) {
    auto session = sessions_.revoke(token);
    if (!session) return;
    store_.transact([&](Transaction& tx) {
        auth::append_audit(tx, session->user_id, "logout: " + session->user_id, now);
    });
}

UserAccount AuthService::resolve_session(std::string_view token) const {
    return resolve_session(token, clock_());
}

UserAccount AuthService::resolve_session(std::string_view token, Timestamp now) const {
    auto session = sessions_.find(token, now);
    if (!session) throw invalid_session();
    auto user = store_.read([&](const storage::Reader& r) {
        return r.get<UserAccount>(EntityKind::UserAccount, session->user_id);
    });
    if (!user || user->account_status != AccountStatus::Active) throw invalid_session();
    return *user;
}

Role AuthService::create_or_update_role(const UserAccount& actor, std::string_view role_name,
                                        std::string_view /*description*/,
                                        const std::set<PrivilegeName>& privileges) {
    const std::string name = trim(role_name);
    if (name.empty()) {
        throw Error(ErrorCode::FieldErrors, "role name is required",
                    std::vector<FieldError>{{"role_name", ErrorCode::FieldErrors}});
    }
    const Timestamp now = clock_();
    return store_.transact([&](Transaction& tx) {
        require(tx, actor.user_id, PrivilegeName::ManageUsers);
        auto existing = find_role_by_name(tx, name);
        if (existing && existing->role_name == kAdministratorRoleName) {
            throw cannot_modify_administrator();
        }
        RoleId id;
        if (existing) {
            id = existing->role_id;
        } else {
            id = tx.save(EntityKind::Role, role_row(Role{"", name, Status::Enabled, {}}));
        }
        set_role_privileges(tx, id, privileges);
        auth::append_audit(tx, actor.user_id, (existing ? "update role: " : "create role: ") + id, now);
        return *load_role(tx, id);
    });
}

Role AuthService::update_role(const UserAccount& actor, std::string_view role_id,
                              const RoleChanges& changes) {
    const Timestamp now = clock_();
    return store_.transact([&](Transaction& tx) {
        require(tx, actor.user_id, PrivilegeName::ManageUsers);
        auto role = load_role(tx, role_id);
        if (!role) throw unknown_role(role_id);
        if (role->role_name == kAdministratorRoleName) throw cannot_modify_administrator();
        if (changes.role_name) {
            role->role_name = trim(*changes.role_name);
            if (role->role_name.empty()) {
                throw Error(ErrorCode::FieldErrors, "role name is required",
                            std::vector<FieldError>{{"role_name", ErrorCode::FieldErrors}});
            }
            if (storage::fold_ascii(role->role_name) == storage::fold_ascii(kAdministratorRoleName)) {
                throw cannot_modify_administrator();
            }
        }
        if (changes.status) role->status = *changes.status;
        tx.save(EntityKind::Role, role_row(*role));
        if (changes.privileges) set_role_privileges(tx, role->role_id, *changes.privileges);
        auth::append_audit(tx, actor.user_id, "update role: " + role->role_id, now);
        return *load_role(tx, role_id);
    });
}

std::vector<Role> AuthService::list_roles(const UserAccount& actor) const {
    return store_.read([&](const storage::Reader& r) {
        require(r, actor.user_id, PrivilegeName::ManageUsers);
        std::vector<Role> out;
        r.for_each(EntityKind::Role, [&](const Json& j) {
            out.push_back(*load_role(r, j.at("role_id").get<std::string>()));
        });
        return out;
    });
}

void AuthService::assign_role(const UserAccount& actor, std::string_view user_id,
                              std::string_view role_id) {
    const Timestamp now = clock_();
    store_.transact([&](Transaction& tx) {
        require(tx, actor.user_id, PrivilegeName::ManageUsers);
        auto user = tx.get<UserAccount>(EntityKind::UserAccount, user_id);
        if (!user) throw unknown_user(user_id);
        if (!tx.contains(EntityKind::Role, role_id)) throw unknown_role(role_id);
        user->role_id = std::string(role_id);
        tx.save(EntityKind::UserAccount, Json(*user));
        auth::append_audit(tx, actor.user_id,
                           "assign role: " + std::string(role_id) + " to " + user->user_id, now);
    });
}

bool AuthService::check_privilege(const UserAccount& user, PrivilegeName p) const {
    return store_.read([&](const storage::Reader& r) {
        auto current = r.get<UserAccount>(EntityKind::UserAccount, user.user_id);
        return current && auth::check_privilege(r, *current, p);
    });
}

std::set<PrivilegeName> AuthService::privileges_of(const UserAccount& user) const {
    return store_.read([&](const storage::Reader& r) {
        auto current = r.get<UserAccount>(EntityKind::UserAccount, user.user_id);
        return current ? granted_privileges(r, *current) : std::set<PrivilegeName>{};
    });
}

bool AuthService::is_administrator(const UserAccount& user) const {
    return store_.read([&](const storage::Reader& r) {
        auto current = r.get<UserAccount>(EntityKind::UserAccount, user.user_id);
        return current && auth::is_administrator(r, *current);
    });
}

AuditEntry AuthService::append_audit(std::string_view actor_id, std::string_view event_description) {
    return append_audit(actor_id, event_description, clock_());
}

AuditEntry AuthService::append_audit(std::string_view actor_id, std::string_view event_description,
                                     Timestamp now) {
    return store_.transact([&](Transaction& tx) {
        return auth::append_audit(tx, actor_id, event_description, now);
    });
}

std::vector<AuditEntry> AuthService::query_audit(const UserAccount& actor,
                                                 const AuditFilter& filter) const {
    return store_.read([&](const storage::Reader& r) {
        require(r, actor.user_id, PrivilegeName::ManageUsers);
        return read_audit(r, filter);
    });
}

}  // namespace archivist::auth
