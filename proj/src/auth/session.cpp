#include "archivist/auth/session.hpp"

#include <mutex>

#include "archivist/crypto.hpp"

namespace archivist::auth {

namespace {
constexpr std::size_t kTokenBytes = 32;
constexpr std::size_t kSweepEvery = 256;
}  // namespace

SessionToken SessionRegistry::issue(const UserId& user_id, Timestamp now,
                                    std::chrono::milliseconds ttl) {
    SessionToken s{crypto::base64url(crypto::random_bytes(kTokenBytes)), user_id, now, now + ttl};
    std::unique_lock lock(mutex_);
    if (++issued_since_sweep_ >= kSweepEvery) sweep(now);
    sessions_[s.token] = s;
    return s;
}

std::optional<SessionToken> SessionRegistry::find(std::string_view token, Timestamp now) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(std::string(token));
    if (it == sessions_.end() || now >= it->second.expires_at) return std::nullopt;
    return it->second;
}

std::optional<SessionToken> SessionRegistry::revoke(std::string_view token) {
    std::unique_lock lock(mutex_);
    auto it = sessions_.find(std::string(token));
    if (it == sessions_.end()) return std::nullopt;
    SessionToken out = std::move(it->second);
    sessions_.erase(it);
    return out;
}

std::size_t SessionRegistry::size() const {
    std::shared_lock lock(mutex_);
    return sessions_.size();
}

void SessionRegistry::sweep(Timestamp now) {
    issued_since_sweep_ = 0;
    std::erase_if(sessions_, [&](const auto& kv) { return now >= kv.second.expires_at; });
}

}  // namespace archivist::auth
