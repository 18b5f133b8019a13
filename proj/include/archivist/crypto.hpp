#pragma once

// Thin wrappers over OpenSSL primitives.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace archivist::crypto {

inline constexpr std::string_view kHashAlgorithm = "sha256";

// Lowercase hex SHA-256 of data.
std::string sha256_hex(std::string_view data);

class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view data);
    std::string final_hex();

private:
    void* ctx_;
};

std::vector<std::uint8_t> random_bytes(std::size_t n);

std::string to_hex(const std::uint8_t* data, std::size_t n);
std::string to_hex(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> from_hex(std::string_view hex);

// RFC 4648 URL-safe alphabet, no padding.
std::string base64url(const std::vector<std::uint8_t>& data);

std::vector<std::uint8_t> pbkdf2_sha256(std::string_view password,
                                        const std::vector<std::uint8_t>& salt,
                                        unsigned iterations, std::size_t key_len);

bool constant_time_equal(const std::vector<std::uint8_t>& a,
                         const std::vector<std::uint8_t>& b) noexcept;

// Overwrites the buffer in a way the optimizer may not elide.
void cleanse(std::string& s) noexcept;

}  // namespace archivist::crypto
