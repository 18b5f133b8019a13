#include "archivist/archive/bootstrap.hpp"

#include "archivist/auth/audit.hpp"
#include "archivist/auth/auth_service.hpp"
#include "archivist/auth/rbac.hpp"
#include "archivist/domain/validate.hpp"
#include "archivist/error.hpp"

namespace archivist {

using storage::EntityKind;

namespace {

struct SeedCategory {
    std::string_view name;
    std::string_view description;
};

constexpr SeedCategory kSeedCategories[] = {
    {"X-ray", "projection radiography"},
    {"CT scan", "computed tomography"},
    {"Mammography", "breast imaging"},
};

Error already_initialized() {
    return Error(ErrorCode::AlreadyInitialized, "store already has user accounts");
}

}  // namespace

bool is_initialized(const storage::Reader& r) { return r.count(EntityKind::UserAccount) > 0; }

BootstrapResult initialize_archive(storage::Store& store, const UserId& admin_user_id,
                                   std::string_view password, Timestamp now,
                                   unsigned password_iterations) {
    if (store.read([](const storage::Reader& r) { return is_initialized(r); })) {
        throw already_initialized();
    }
    UserAccount admin;
    admin.user_id = admin_user_id;
    admin.user_profession = "Administrator";
    admin = validate_user_account(std::move(admin));
    if (!auth::is_strong_enough(password)) {
        throw Error(ErrorCode::WeakPassword,
                    "password must be at least " + std::to_string(auth::kMinPasswordChars) +
                        " characters",
                    "password");
    }
    admin.password_digest = auth::hash_password(password, password_iterations);

    return store.transact([&](storage::Transaction& tx) {
        if (is_initialized(tx)) throw already_initialized();
        const std::string system(kSystemUserId);

        for (auth::PrivilegeName p : auth::kAllPrivileges) {
            if (auth::privilege_record(tx, p)) continue;
            const auto id = tx.save(EntityKind::Privilege,
                                    Json(Privilege{"", std::string(auth::label(p)), Status::Enabled}));
            auth::append_audit(tx, system, "create privilege: " + id, now);
        }

        RoleId role_id;
        if (auto existing = auth::find_role_by_name(tx, kAdministratorRoleName)) {
            role_id = existing->role_id;
        } else {
            role_id = tx.save(EntityKind::Role, role_row(Role{"", std::string(kAdministratorRoleName),
                                                              Status::Enabled, {}}));
            auth::append_audit(tx, system, "create role: " + role_id, now);
        }
        auth::set_role_privileges(tx, role_id, {auth::kAllPrivileges.begin(), auth::kAllPrivileges.end()});

        for (const auto& c : kSeedCategories) {
            if (tx.find_unique(EntityKind::ScanCategory, "category_name", c.name)) continue;
            const auto id = tx.save(EntityKind::ScanCategory,
                                    Json(ScanCategory{"", std::string(c.name), std::string(c.description)}));
            auth::append_audit(tx, system, "create category: " + id, now);
        }

        admin.role_id = role_id;
        tx.save(EntityKind::UserAccount, Json(admin));
        auth::append_audit(tx, system, "user created: " + admin.user_id, now);
        return BootstrapResult{admin.user_id, role_id};
    });
}

}  // namespace archivist
