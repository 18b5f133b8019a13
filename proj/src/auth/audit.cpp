#include "archivist/auth/audit.hpp"

#include <algorithm>

#include "archivist/error.hpp"

namespace archivist::auth {

using storage::EntityKind;

AuditEntry append_audit(storage::Transaction& tx, std::string_view user_id,
                        std::string_view event_description, Timestamp now) {
    if (event_description.empty()) {
        throw Error(ErrorCode::EmptyDescription, "audit event description is empty");
    }
    if (auto previous = tx.last(EntityKind::AuditEntry)) {
        now = std::max(now, decode<AuditEntry>(*previous).event_timestamp);
    }
    AuditEntry entry{0, std::string(user_id), std::string(event_description), now};
    entry.log_id = std::stoll(tx.save(EntityKind::AuditEntry, Json(entry)));
    return entry;
}

std::vector<AuditEntry> read_audit(const storage::Reader& r, const AuditFilter& filter) {
    std::vector<AuditEntry> out;
    r.for_each(EntityKind::AuditEntry, [&](const Json& j) {
        auto e = decode<AuditEntry>(j);
        if (filter.user_id && e.user_id != *filter.user_id) return;
        if (filter.from && e.event_timestamp < *filter.from) return;
        if (filter.to && e.event_timestamp >= *filter.to) return;
        out.push_back(std::move(e));
    });
    return out;
}

}  // namespace archivist::auth
