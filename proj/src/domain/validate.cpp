#include "archivist/domain/validate.hpp"

#include <algorithm>

namespace archivist {

namespace {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void check_contact(std::string_view email, std::string_view phone,
                   std::vector<FieldError>& errors) {
    if (!is_valid_email(email)) errors.push_back({"email", ErrorCode::BadEmail});
    if (!is_valid_phone(phone)) errors.push_back({"phone", ErrorCode::BadPhone});
}

[[noreturn]] void throw_field_errors(std::vector<FieldError> errors) {
    std::string message = "invalid fields:";
    for (std::size_t i = 0; i < errors.size(); ++i) {
        message += (i == 0 ? " " : ", ") + errors[i].field;
    }
    throw Error(ErrorCode::FieldErrors, std::move(message), std::move(errors));
}

}  // namespace

std::string trim(std::string_view s) {
    auto first = std::find_if_not(s.begin(), s.end(), is_space);
    auto last = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return first < last ? std::string(first, last) : std::string();
}

std::size_t utf8_length(std::string_view s) noexcept {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::string validate_card_number(std::string_view raw) {
    std::string card = trim(raw);
    if (card.empty()) throw Error(ErrorCode::EmptyCardNumber, "card number is empty");
    if (utf8_length(card) > kMaxCardNumberChars) {
        throw Error(ErrorCode::CardNumberTooLong, "card number exceeds 64 characters");
    }
    return card;
}

bool is_valid_email(std::string_view email) noexcept {
    if (email.empty()) return true;
    const auto at = email.find('@');
    if (at == std::string_view::npos || email.find('@', at + 1) != std::string_view::npos) {
        return false;
    }
    return at > 0 && at + 1 < email.size();
}

bool is_valid_phone(std::string_view phone) noexcept {
    if (phone.size() > kMaxPhoneChars) return false;
    return std::all_of(phone.begin(), phone.end(), [](char c) {
        return (c >= '0' && c <= '9') || c == ' ' || c == '+' || c == '-';
    });
}

void validate_contact(std::string_view email, std::string_view phone) {
    std::vector<FieldError> errors;
    check_contact(email, phone, errors);
    if (!errors.empty()) throw_field_errors(std::move(errors));
}

PatientRecord validate_patient_record(PatientRecord p) {
    p.first_name = trim(p.first_name);
    p.last_name = trim(p.last_name);
    p.address = trim(p.address);
    p.phone = trim(p.phone);
    p.email = trim(p.email);

    std::vector<FieldError> errors;
    if (p.first_name.empty()) errors.push_back({"first_name", ErrorCode::FieldErrors});
    if (p.last_name.empty()) errors.push_back({"last_name", ErrorCode::FieldErrors});
    check_contact(p.email, p.phone, errors);
    try {
        p.card_number = validate_card_number(p.card_number);
    } catch (const Error& e) {
        errors.push_back({"card_number", e.code()});
    }
    if (!errors.empty()) throw_field_errors(std::move(errors));
    return p;
}

UserAccount validate_user_account(UserAccount u) {
    u.user_id = trim(u.user_id);
    u.title = trim(u.title);
    u.first_name = trim(u.first_name);
    u.last_name = trim(u.last_name);
    u.phone = trim(u.phone);
    u.email = trim(u.email);
    u.address = trim(u.address);
    u.user_profession = trim(u.user_profession);

    std::vector<FieldError> errors;
    const bool has_space = std::any_of(u.user_id.begin(), u.user_id.end(), is_space);
    if (u.user_id.empty() || has_space || utf8_length(u.user_id) > kMaxUserIdChars ||
        u.user_id == kSystemUserId) {
        errors.push_back({"user_id", ErrorCode::FieldErrors});
    }
    check_contact(u.email, u.phone, errors);
    if (!errors.empty()) throw_field_errors(std::move(errors));
    return u;
}

void validate_scan_record(const ScanRecord& scan) {
    std::vector<FieldError> errors;
    if (scan.patient_id.empty()) errors.push_back({"patient_id", ErrorCode::FieldErrors});
    if (scan.scan_category_id.empty()) {
        errors.push_back({"scan_category_id", ErrorCode::FieldErrors});
    }
    if (scan.scan_image.digest.empty()) errors.push_back({"scan_image", ErrorCode::FieldErrors});
    if (scan.expiry && *scan.expiry <= scan.scan_timestamp) {
        errors.push_back({"expiry", ErrorCode::FieldErrors});
    }
    if (!errors.empty()) throw_field_errors(std::move(errors));
}

}  // namespace archivist
