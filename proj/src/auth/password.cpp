#include "archivist/auth/password.hpp"

#include <charconv>
#include <optional>
#include <vector>

#include "archivist/crypto.hpp"
#include "archivist/domain/validate.hpp"

namespace archivist::auth {

namespace {

constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kKeyBytes = 32;

struct Parsed {
    unsigned iterations = 0;
    std::vector<std::uint8_t> salt;
    std::vector<std::uint8_t> key;
};

std::optional<Parsed> parse(std::string_view digest) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= digest.size(); ++i) {
        if (i == digest.size() || digest[i] == '$') {
            parts.push_back(digest.substr(start, i - start));
            start = i + 1;
        }
    }
    if (parts.size() != 4 || parts[0] != kPasswordScheme) return std::nullopt;
    Parsed out;
    auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), out.iterations);
    if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size() || out.iterations == 0) {
        return std::nullopt;
    }
    try {
        out.salt = crypto::from_hex(parts[2]);
        out.key = crypto::from_hex(parts[3]);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    if (out.key.empty()) return std::nullopt;
    return out;
}

}  // namespace

bool is_strong_enough(std::string_view password) {
    return utf8_length(password) >= kMinPasswordChars;
}

std::string hash_password(std::string_view password, unsigned iterations) {
    const auto salt = crypto::random_bytes(kSaltBytes);
    const auto key = crypto::pbkdf2_sha256(password, salt, iterations, kKeyBytes);
    return std::string(kPasswordScheme) + "$" + std::to_string(iterations) + "$" +
           crypto::to_hex(salt) + "$" + crypto::to_hex(key);
}

bool verify_password(std::string_view password, std::string_view digest) {
    auto parsed = parse(digest);
    if (!parsed) return false;
    const auto key = crypto::pbkdf2_sha256(password, parsed->salt, parsed->iterations, parsed->key.size());
    return crypto::constant_time_equal(key, parsed->key);
}

}  // namespace archivist::auth
