#pragma once

// Salted password digests in the self-describing form
//
//   pbkdf2-sha256$<iterations>$<salt-hex>$<derived-key-hex>
//
// The algorithm tag lets a later release migrate digests on login.

#include <string>
#include <string_view>

namespace archivist::auth {

inline constexpr std::string_view kPasswordScheme = "pbkdf2-sha256";
inline constexpr unsigned kDefaultPasswordIterations = 100'000;
inline constexpr std::size_t kMinPasswordChars = 8;

// Counts characters, not bytes.
bool is_strong_enough(std::string_view password);

std::string hash_password(std::string_view password, unsigned iterations = kDefaultPasswordIterations);

// False for a wrong password or a malformed digest. The comparison of the
// derived keys is constant time.
bool verify_password(std::string_view password, std::string_view digest);

}  // namespace archivist::auth
