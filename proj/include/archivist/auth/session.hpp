#pragma once

// In-memory session registry. Tokens do not survive a restart; clients log in
// again.

#include <chrono>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "archivist/domain/types.hpp"

namespace archivist::auth {

class SessionRegistry {
public:
    // 32 random bytes, base64url.
    SessionToken issue(const UserId& user_id, Timestamp now, std::chrono::milliseconds ttl);

    // The session when known and now < expires_at.
    std::optional<SessionToken> find(std::string_view token, Timestamp now) const;

    // The removed session, or nullopt when the token was unknown.
    std::optional<SessionToken> revoke(std::string_view token);

    std::size_t size() const;

private:
    void sweep(Timestamp now);

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, SessionToken> sessions_;
    std::size_t issued_since_sweep_ = 0;
};

}  // namespace archivist::auth
