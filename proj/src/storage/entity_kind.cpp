#include "archivist/storage/entity_kind.hpp"

namespace archivist::storage {

namespace {

std::array<KindSchema, 8> build_schemas() {
    std::array<KindSchema, 8> s{};

    s[kind_index(EntityKind::Patient)] = KindSchema{
        .kind = EntityKind::Patient,
        .name = "patients",
        .id_field = "patient_id",
        .id_prefix = "P-",
        .fields = {"patient_id", "first_name", "last_name", "address", "phone", "email", "sex",
                   "card_number", "photo"},
        .unique = {{{"card_number"}, false}},
        .blob_fields = {"photo"},
    };
    s[kind_index(EntityKind::Scan)] = KindSchema{
        .kind = EntityKind::Scan,
        .name = "scans",
        .id_field = "scan_id",
        .id_prefix = "S-",
        .fields = {"scan_id", "patient_id", "scan_category_id", "radiographer", "scan_image",
                   "scan_timestamp", "expiry", "scan_details", "comments"},
        .foreign_keys = {{"patient_id", EntityKind::Patient},
                         {"scan_category_id", EntityKind::ScanCategory}},
        .blob_fields = {"scan_image"},
    };
    s[kind_index(EntityKind::ScanCategory)] = KindSchema{
        .kind = EntityKind::ScanCategory,
        .name = "scan_categories",
        .id_field = "category_id",
        .id_prefix = "CAT-",
        .fields = {"category_id", "category_name", "category_description"},
        .unique = {{{"category_name"}, true}},
    };
    s[kind_index(EntityKind::UserAccount)] = KindSchema{
        .kind = EntityKind::UserAccount,
        .name = "user_accounts",
        .id_field = "user_id",
        .caller_assigned_id = true,
        .fields = {"user_id", "password_digest", "title", "first_name", "last_name", "sex",
                   "phone", "email", "address", "photo", "user_profession", "account_status",
                   "role_id"},
        .foreign_keys = {{"role_id", EntityKind::Role, true}},
        .blob_fields = {"photo"},
    };
    s[kind_index(EntityKind::Role)] = KindSchema{
        .kind = EntityKind::Role,
        .name = "roles",
        .id_field = "role_id",
        .id_prefix = "R-",
        .fields = {"role_id", "role_name", "status"},
        .unique = {{{"role_name"}, true}},
    };
    s[kind_index(EntityKind::Privilege)] = KindSchema{
        .kind = EntityKind::Privilege,
        .name = "system_privileges",
        .id_field = "privilege_id",
        .id_prefix = "PRV-",
        .deletable = false,
        .fields = {"privilege_id", "privilege_description", "status"},
        .unique = {{{"privilege_description"}, true}},
    };
    s[kind_index(EntityKind::RolePrivilege)] = KindSchema{
        .kind = EntityKind::RolePrivilege,
        .name = "role_privileges",
        .id_field = "sn",
        .id_prefix = "RP-",
        .fields = {"sn", "role_id", "privilege_id"},
        .unique = {{{"role_id", "privilege_id"}, false}},
        .foreign_keys = {{"role_id", EntityKind::Role}, {"privilege_id", EntityKind::Privilege}},
    };
    s[kind_index(EntityKind::AuditEntry)] = KindSchema{
        .kind = EntityKind::AuditEntry,
        .name = "audit_trail",
        .id_field = "log_id",
        .integer_id = true,
        .immutable = true,
        .deletable = false,
        .fields = {"log_id", "user_id", "event_description", "event_timestamp"},
    };
    return s;
}

const std::array<KindSchema, 8>& schemas() {
    static const std::array<KindSchema, 8> s = build_schemas();
    return s;
}

}  // namespace

const KindSchema& schema(EntityKind kind) { return schemas()[kind_index(kind)]; }

std::string_view kind_name(EntityKind kind) noexcept { return schema(kind).name; }

std::optional<EntityKind> parse_kind(std::string_view name) noexcept {
    for (const auto& s : schemas()) {
        if (s.name == name) return s.kind;
    }
    return std::nullopt;
}

}  // namespace archivist::storage
