#pragma once

// Canonical serialized form: JSON objects with snake_case keys, RFC 3339 UTC
// timestamps, Sex as "F"/"M"/"U". Optional values serialize as null and the
// key is always present. from_json is strict: a missing key or a value of the
// wrong shape throws Error{BadRequest} naming the field.

#include <nlohmann/json.hpp>

#include "archivist/domain/types.hpp"

namespace archivist {

using Json = nlohmann::json;

void to_json(Json& j, const BlobRef& v);
void from_json(const Json& j, BlobRef& v);
void to_json(Json& j, const PatientRecord& v);
void from_json(const Json& j, PatientRecord& v);
void to_json(Json& j, const ScanCategory& v);
void from_json(const Json& j, ScanCategory& v);
void to_json(Json& j, const ScanRecord& v);
void from_json(const Json& j, ScanRecord& v);
void to_json(Json& j, const UserAccount& v);
void from_json(const Json& j, UserAccount& v);
void to_json(Json& j, const Privilege& v);
void from_json(const Json& j, Privilege& v);
void to_json(Json& j, const Role& v);
void from_json(const Json& j, Role& v);
void to_json(Json& j, const RolePrivilege& v);
void from_json(const Json& j, RolePrivilege& v);
void to_json(Json& j, const AuditEntry& v);
void from_json(const Json& j, AuditEntry& v);
void to_json(Json& j, const SessionToken& v);
void from_json(const Json& j, SessionToken& v);

// ROLE table row: the Role without its privilege set.
Json role_row(const Role& role);

// UserAccount minus password_digest, for responses leaving the service.
Json public_user_json(const UserAccount& user);

Json timestamp_json(Timestamp t);
Timestamp timestamp_from_json(const Json& j, std::string_view field);

template <typename T>
T decode(const Json& j) {
    T value;
    from_json(j, value);
    return value;
}

}  // namespace archivist
