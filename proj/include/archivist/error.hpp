#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace archivist {

// Every failure a module can report. The HTTP layer maps each value to a
// status and a stable wire code (see api/errors.hpp), so adding a value here
// means adding a row there.
enum class ErrorCode {
    // domain-model
    EmptyCardNumber,
    CardNumberTooLong,
    BadEmail,
    BadPhone,
    FieldErrors,
    // storage
    AlreadyLocked,
    CorruptStore,
    IoFailure,
    BlobTooLarge,
    BlobNotFound,
    IntegrityFailure,
    UniqueViolation,
    ImmutableKind,
    ForeignKeyViolation,
    UnknownField,
    HasDependents,
    // auth-rbac
    Forbidden,
    DuplicateUserId,
    WeakPassword,
    UnknownUser,
    LoginError,
    InvalidSession,
    CannotModifyAdministrator,
    UnknownRole,
    EmptyDescription,
    // archive-core
    DuplicateCardNumber,
    UnknownPatient,
    DuplicateCategory,
    UnknownCategory,
    UnknownPatientCard,
    UnknownScan,
    UnsupportedMediaType,
    // search
    EmptyTerm,
    BadPaging,
    // service plumbing
    ConfigParseError,
    BadRequest,
    AlreadyInitialized,
    StoreNotInitialized,
    Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

struct FieldError {
    std::string field;
    ErrorCode code;

    bool operator==(const FieldError&) const = default;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message);
    Error(ErrorCode code, std::string message, std::string field);
    Error(ErrorCode code, std::string message, std::vector<FieldError> fields);

    static Error dependents(std::size_t count);

    ErrorCode code() const noexcept { return code_; }
    // Offending field for UniqueViolation / UnknownField / ConfigParseError.
    const std::string& field() const noexcept { return field_; }
    const std::vector<FieldError>& field_errors() const noexcept { return fields_; }
    // Dependent count for HasDependents.
    std::size_t count() const noexcept { return count_; }

private:
    ErrorCode code_;
    std::string field_;
    std::vector<FieldError> fields_;
    std::size_t count_ = 0;
};

}  // namespace archivist
