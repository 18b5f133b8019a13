#include "archivist/domain/serialize.hpp"

#include "archivist/error.hpp"

namespace archivist {

std::string_view to_string(Sex s) noexcept {
    switch (s) {
        case Sex::Female: return "F";
        case Sex::Male: return "M";
        case Sex::Unspecified: return "U";
    }
    return "U";
}

std::string_view to_string(AccountStatus s) noexcept {
    return s == AccountStatus::Active ? "active" : "disabled";
}

std::string_view to_string(Status s) noexcept {
    return s == Status::Enabled ? "enabled" : "disabled";
}

std::optional<Sex> parse_sex(std::string_view s) noexcept {
    if (s == "F") return Sex::Female;
    if (s == "M") return Sex::Male;
    if (s == "U") return Sex::Unspecified;
    return std::nullopt;
}

std::optional<AccountStatus> parse_account_status(std::string_view s) noexcept {
    if (s == "active") return AccountStatus::Active;
    if (s == "disabled") return AccountStatus::Disabled;
    return std::nullopt;
}

std::optional<Status> parse_status(std::string_view s) noexcept {
    if (s == "enabled") return Status::Enabled;
    if (s == "disabled") return Status::Disabled;
    return std::nullopt;
}

namespace {

[[noreturn]] void bad_field(std::string_view field, std::string_view what) {
    throw Error(ErrorCode::BadRequest,
                "field '" + std::string(field) + "' " + std::string(what), std::string(field));
}

const Json& member(const Json& j, std::string_view field) {
    if (!j.is_object()) bad_field(field, "expected inside an object");
    auto it = j.find(field);
    if (it == j.end()) bad_field(field, "is missing");
    return *it;
}

std::string get_string(const Json& j, std::string_view field) {
    const Json& v = member(j, field);
    if (!v.is_string()) bad_field(field, "must be a string");
    return v.get<std::string>();
}

template <typename Enum>
Enum get_enum(const Json& j, std::string_view field,
              std::optional<Enum> (*parse)(std::string_view) noexcept) {
    auto parsed = parse(get_string(j, field));
    if (!parsed) bad_field(field, "has an unknown value");
    return *parsed;
}

std::optional<BlobRef> get_optional_blob(const Json& j, std::string_view field) {
    const Json& v = member(j, field);
    if (v.is_null()) return std::nullopt;
    return decode<BlobRef>(v);
}

Json optional_blob_json(const std::optional<BlobRef>& b) {
    return b ? Json(*b) : Json(nullptr);
}

}  // namespace

Json timestamp_json(Timestamp t) { return format_rfc3339(t); }

Timestamp timestamp_from_json(const Json& j, std::string_view field) {
    if (!j.is_string()) bad_field(field, "must be an RFC 3339 string");
    auto t = parse_rfc3339(j.get<std::string>());
    if (!t) bad_field(field, "must be an RFC 3339 string");
    return *t;
}

void to_json(Json& j, const BlobRef& v) {
    j = Json{{"digest", v.digest}, {"size_bytes", v.size_bytes}, {"media_type", v.media_type}};
}

void from_json(const Json& j, BlobRef& v) {
    v.digest = get_string(j, "digest");
    const Json& size = member(j, "size_bytes");
    if (!size.is_number_unsigned() && !(size.is_number_integer() && size.get<std::int64_t>() >= 0)) {
        bad_field("size_bytes", "must be a non-negative integer");
    }
    v.size_bytes = size.get<std::uint64_t>();
    v.media_type = get_string(j, "media_type");
}

void to_json(Json& j, const PatientRecord& v) {
    j = Json{{"patient_id", v.patient_id},
             {"first_name", v.first_name},
             {"last_name", v.last_name},
             {"address", v.address},
             {"phone", v.phone},
             {"email", v.email},
             {"sex", to_string(v.sex)},
             {"card_number", v.card_number},
             {"photo", optional_blob_json(v.photo)}};
}

void from_json(const Json& j, PatientRecord& v) {
    v.patient_id = get_string(j, "patient_id");
    v.first_name = get_string(j, "first_name");
    v.last_name = get_string(j, "last_name");
    v.address = get_string(j, "address");
    v.phone = get_string(j, "phone");
    v.email = get_string(j, "email");
    v.sex = get_enum<Sex>(j, "sex", parse_sex);
    v.card_number = get_string(j, "card_number");
    v.photo = get_optional_blob(j, "photo");
}

void to_json(Json& j, const ScanCategory& v) {
    j = Json{{"category_id", v.category_id},
             {"category_name", v.category_name},
             {"category_description", v.category_description}};
}

void from_json(const Json& j, ScanCategory& v) {
    v.category_id = get_string(j, "category_id");
    v.category_name = get_string(j, "category_name");
    v.category_description = get_string(j, "category_description");
}

void to_json(Json& j, const ScanRecord& v) {
    j = Json{{"scan_id", v.scan_id},
             {"patient_id", v.patient_id},
             {"scan_category_id", v.scan_category_id},
             {"radiographer", v.radiographer},
             {"scan_image", v.scan_image},
             {"scan_timestamp", timestamp_json(v.scan_timestamp)},
             {"expiry", v.expiry ? timestamp_json(*v.expiry) : Json(nullptr)},
             {"scan_details", v.scan_details},
             {"comments", v.comments}};
}

void from_json(const Json& j, ScanRecord& v) {
    v.scan_id = get_string(j, "scan_id");
    v.patient_id = get_string(j, "patient_id");
    v.scan_category_id = get_string(j, "scan_category_id");
    v.radiographer = get_string(j, "radiographer");
    v.scan_image = decode<BlobRef>(member(j, "scan_image"));
    v.scan_timestamp = timestamp_from_json(member(j, "scan_timestamp"), "scan_timestamp");
    const Json& expiry = member(j, "expiry");
    v.expiry = expiry.is_null() ? std::nullopt
                                : std::optional<Timestamp>(timestamp_from_json(expiry, "expiry"));
    v.scan_details = get_string(j, "scan_details");
    v.comments = get_string(j, "comments");
}

void to_json(Json& j, const UserAccount& v) {
    j = Json{{"user_id", v.user_id},
             {"password_digest", v.password_digest},
             {"title", v.title},
             {"first_name", v.first_name},
             {"last_name", v.last_name},
             {"sex", to_string(v.sex)},
             {"phone", v.phone},
             {"email", v.email},
             {"address", v.address},
             {"photo", optional_blob_json(v.photo)},
             {"user_profession", v.user_profession},
             {"account_status", to_string(v.account_status)},
             {"role_id", v.role_id ? Json(*v.role_id) : Json(nullptr)}};
}

void from_json(const Json& j, UserAccount& v) {
    v.user_id = get_string(j, "user_id");
    v.password_digest = get_string(j, "password_digest");
    v.title = get_string(j, "title");
    v.first_name = get_string(j, "first_name");
    v.last_name = get_string(j, "last_name");
    v.sex = get_enum<Sex>(j, "sex", parse_sex);
    v.phone = get_string(j, "phone");
    v.email = get_string(j, "email");
    v.address = get_string(j, "address");
    v.photo = get_optional_blob(j, "photo");
    v.user_profession = get_string(j, "user_profession");
    v.account_status = get_enum<AccountStatus>(j, "account_status", parse_account_status);
    const Json& role = member(j, "role_id");
    if (role.is_null()) {
        v.role_id.reset();
    } else if (role.is_string()) {
        v.role_id = role.get<std::string>();
    } else {
        bad_field("role_id", "must be a string or null");
    }
}

Json public_user_json(const UserAccount& user) {
    Json j = user;
    j.erase("password_digest");
    return j;
}

void to_json(Json& j, const Privilege& v) {
    j = Json{{"privilege_id", v.privilege_id},
             {"privilege_description", v.privilege_description},
             {"status", to_string(v.status)}};
}

void from_json(const Json& j, Privilege& v) {
    v.privilege_id = get_string(j, "privilege_id");
    v.privilege_description = get_string(j, "privilege_description");
    v.status = get_enum<Status>(j, "status", parse_status);
}

Json role_row(const Role& role) {
    return Json{{"role_id", role.role_id},
                {"role_name", role.role_name},
                {"status", to_string(role.status)}};
}

void to_json(Json& j, const Role& v) {
    j = role_row(v);
    j["privilege_ids"] = v.privilege_ids;
}

void from_json(const Json& j, Role& v) {
    v.role_id = get_string(j, "role_id");
    v.role_name = get_string(j, "role_name");
    v.status = get_enum<Status>(j, "status", parse_status);
    v.privilege_ids.clear();
    if (auto it = j.find("privilege_ids"); it != j.end()) {
        if (!it->is_array()) bad_field("privilege_ids", "must be an array");
        for (const auto& p : *it) {
            if (!p.is_string()) bad_field("privilege_ids", "must contain strings");
            v.privilege_ids.insert(p.get<std::string>());
        }
    }
}

void to_json(Json& j, const RolePrivilege& v) {
    j = Json{{"sn", v.sn}, {"role_id", v.role_id}, {"privilege_id", v.privilege_id}};
}

void from_json(const Json& j, RolePrivilege& v) {
    v.sn = get_string(j, "sn");
    v.role_id = get_string(j, "role_id");
    v.privilege_id = get_string(j, "privilege_id");
}

void to_json(Json& j, const AuditEntry& v) {
    j = Json{{"log_id", v.log_id},
             {"user_id", v.user_id},
             {"event_description", v.event_description},
             {"event_timestamp", timestamp_json(v.event_timestamp)}};
}

void from_json(const Json& j, AuditEntry& v) {
    const Json& id = member(j, "log_id");
    if (!id.is_number_integer()) bad_field("log_id", "must be an integer");
    v.log_id = id.get<std::int64_t>();
    v.user_id = get_string(j, "user_id");
    v.event_description = get_string(j, "event_description");
    v.event_timestamp = timestamp_from_json(member(j, "event_timestamp"), "event_timestamp");
}

void to_json(Json& j, const SessionToken& v) {
    j = Json{{"token", v.token},
             {"user_id", v.user_id},
             {"issued_at", timestamp_json(v.issued_at)},
             {"expires_at", timestamp_json(v.expires_at)}};
}

void from_json(const Json& j, SessionToken& v) {
    v.token = get_string(j, "token");
    v.user_id = get_string(j, "user_id");
    v.issued_at = timestamp_from_json(member(j, "issued_at"), "issued_at");
    v.expires_at = timestamp_from_json(member(j, "expires_at"), "expires_at");
}

}  // namespace archivist
