#pragma once

// Shared fixtures for the unit and acceptance suites: scratch directories and
// seeded random generators for domain records.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

#include "archivist/domain/types.hpp"

namespace archivist::testing {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("archivist-test-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++) + "-" +
                 std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

// Settable clock for session expiry and audit timestamp tests.
class FakeClock {
public:
    explicit FakeClock(Timestamp start = Timestamp{std::chrono::milliseconds{1'790'000'000'000LL}})
        : ms_(start.time_since_epoch().count()) {}

    Timestamp now() const { return Timestamp{std::chrono::milliseconds{ms_.load()}}; }
    void set(Timestamp t) { ms_ = t.time_since_epoch().count(); }
    void advance(std::chrono::milliseconds d) { ms_ += d.count(); }
    Clock fn() const {
        return [this] { return now(); };
    }

private:
    std::atomic<long long> ms_;
};

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t next() { return rng_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    bool coin() { return (rng_() & 1) != 0; }

    std::string text(std::size_t min_len, std::size_t max_len,
                     std::string_view alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ ") {
        const std::size_t len = min_len + below(max_len - min_len + 1);
        std::string out;
        for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[below(alphabet.size())]);
        return out;
    }

    std::string word(std::size_t min_len, std::size_t max_len) {
        return text(min_len, max_len, "abcdefghijklmnopqrstuvwxyz");
    }

    std::string bytes(std::size_t n) {
        std::string out(n, '\0');
        for (auto& c : out) c = static_cast<char>(rng_() & 0xFF);
        return out;
    }

    Sex sex() {
        static constexpr Sex values[] = {Sex::Female, Sex::Male, Sex::Unspecified};
        return values[below(3)];
    }

    Timestamp instant() {
        // 2000-01-01 .. ~2033, millisecond resolution.
        return Timestamp{std::chrono::milliseconds{946684800000LL +
                                                   static_cast<long long>(below(1'000'000'000'000ULL))}};
    }

    std::string email() { return coin() ? std::string() : word(1, 8) + "@" + word(1, 8) + ".example"; }
    std::string phone() { return coin() ? std::string() : "+234 " + text(3, 12, "0123456789 -"); }

    BlobRef blob_ref() {
        static constexpr std::string_view hex = "0123456789abcdef";
        BlobRef b;
        for (int i = 0; i < 64; ++i) b.digest.push_back(hex[below(16)]);
        b.size_bytes = below(1 << 20);
        b.media_type = coin() ? "image/png" : "application/octet-stream";
        return b;
    }

    PatientRecord patient(std::string card) {
        PatientRecord p;
        p.first_name = word(1, 10);
        p.last_name = word(1, 12);
        p.address = text(0, 30);
        p.phone = phone();
        p.email = email();
        p.sex = sex();
        p.card_number = std::move(card);
        return p;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace archivist::testing
