#pragma once

// Append-only audit trail. Entries are written inside the transaction of the
// operation they describe, so an aborted operation leaves no entry.

#include <optional>
#include <string_view>
#include <vector>

#include "archivist/domain/types.hpp"
#include "archivist/storage/store.hpp"

namespace archivist::auth {

// event_timestamp is max(now, previous entry's timestamp) so the trail stays
// ordered even if the wall clock steps backwards. Throws EmptyDescription.
AuditEntry append_audit(storage::Transaction& tx, std::string_view user_id,
                        std::string_view event_description, Timestamp now);

// from is inclusive, to exclusive.
struct AuditFilter {
    std::optional<UserId> user_id;
    std::optional<Timestamp> from;
    std::optional<Timestamp> to;
};

// Matching entries in log_id order.
std::vector<AuditEntry> read_audit(const storage::Reader& r, const AuditFilter& filter = {});

}  // namespace archivist::auth
