#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "archivist/domain/types.hpp"
#include "archivist/error.hpp"

namespace archivist {

inline constexpr std::size_t kMaxCardNumberChars = 64;
inline constexpr std::size_t kMaxPhoneChars = 32;
inline constexpr std::size_t kMaxUserIdChars = 64;

// Strips leading and trailing ASCII whitespace.
std::string trim(std::string_view s);

// Number of UTF-8 code points in s.
std::size_t utf8_length(std::string_view s) noexcept;

// Trimmed card number; throws EmptyCardNumber or CardNumberTooLong.
std::string validate_card_number(std::string_view raw);

bool is_valid_email(std::string_view email) noexcept;
bool is_valid_phone(std::string_view phone) noexcept;

// Throws FieldErrors listing BadEmail and/or BadPhone.
void validate_contact(std::string_view email, std::string_view phone);

// Returns the record with trimmed text fields, or throws FieldErrors naming
// every offending field.
PatientRecord validate_patient_record(PatientRecord candidate);

// Same contract for user profile fields. Does not look at password_digest.
UserAccount validate_user_account(UserAccount candidate);

// Checks the ScanRecord invariants that need no store access.
void validate_scan_record(const ScanRecord& scan);

}  // namespace archivist
