#include "archivist/auth/rbac.hpp"

#include "archivist/error.hpp"

namespace archivist::auth {

using storage::EntityKind;
using storage::Predicate;

std::string_view label(PrivilegeName p) noexcept {
    switch (p) {
        case PrivilegeName::Patients: return "patients";
        case PrivilegeName::PatientImages: return "patient images";
        case PrivilegeName::ManageUsers: return "manage users";
        case PrivilegeName::News: return "news";
    }
    return "";
}

std::optional<PrivilegeName> parse_privilege(std::string_view text) noexcept {
    for (PrivilegeName p : kAllPrivileges) {
        if (label(p) == text) return p;
    }
    return std::nullopt;
}

std::optional<Privilege> privilege_record(const storage::Reader& r, PrivilegeName p) {
    auto j = r.find_unique(EntityKind::Privilege, "privilege_description", label(p));
    if (!j) return std::nullopt;
    return decode<Privilege>(*j);
}

std::optional<Role> load_role(const storage::Reader& r, std::string_view role_id) {
    auto role = r.get<Role>(EntityKind::Role, role_id);
    if (!role) return std::nullopt;
    for (const auto& rp : r.all<RolePrivilege>(EntityKind::RolePrivilege,
                                               Predicate::equals("role_id", std::string(role_id)))) {
        role->privilege_ids.insert(rp.privilege_id);
    }
    return role;
}

std::optional<Role> find_role_by_name(const storage::Reader& r, std::string_view role_name) {
    auto j = r.find_unique(EntityKind::Role, "role_name", role_name);
    if (!j) return std::nullopt;
    return load_role(r, j->at("role_id").get<std::string>());
}

bool check_privilege(const storage::Reader& r, const UserAccount& user, PrivilegeName p) {
    if (!user.role_id) return false;
    auto role = load_role(r, *user.role_id);
    if (!role || role->status != Status::Enabled) return false;
    auto priv = privilege_record(r, p);
    if (!priv || priv->status != Status::Enabled) return false;
    return role->privilege_ids.contains(priv->privilege_id);
}

std::set<PrivilegeName> granted_privileges(const storage::Reader& r, const UserAccount& user) {
    std::set<PrivilegeName> out;
    for (PrivilegeName p : kAllPrivileges) {
        if (check_privilege(r, user, p)) out.insert(p);
    }
    return out;
}

bool is_administrator(const storage::Reader& r, const UserAccount& user) {
    if (!user.role_id) return false;
    auto role = r.get<Role>(EntityKind::Role, *user.role_id);
    return role && role->status == Status::Enabled && role->role_name == kAdministratorRoleName;
}

namespace {

UserAccount active_account(const storage::Reader& r, std::string_view actor_id,
                           std::string_view needed) {
    auto user = r.get<UserAccount>(EntityKind::UserAccount, actor_id);
    if (!user || user->account_status != AccountStatus::Active) {
        throw Error(ErrorCode::Forbidden, "forbidden: requires " + std::string(needed),
                    std::string(needed));
    }
    return *user;
}

}  // namespace

UserAccount require(const storage::Reader& r, std::string_view actor_id, PrivilegeName p) {
    auto user = active_account(r, actor_id, label(p));
    if (!check_privilege(r, user, p)) {
        throw Error(ErrorCode::Forbidden, "forbidden: requires " + std::string(label(p)),
                    std::string(label(p)));
    }
    return user;
}

UserAccount require_administrator(const storage::Reader& r, std::string_view actor_id,
                                  std::optional<PrivilegeName> p) {
    auto user = p ? require(r, actor_id, *p) : active_account(r, actor_id, "administrator");
    if (!is_administrator(r, user)) {
        throw Error(ErrorCode::Forbidden, "forbidden: requires administrator", "administrator");
    }
    return user;
}

}  // namespace archivist::auth
