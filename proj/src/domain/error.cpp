#include "archivist/error.hpp"

namespace archivist {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyCardNumber: return "EmptyCardNumber";
        case ErrorCode::CardNumberTooLong: return "CardNumberTooLong";
        case ErrorCode::BadEmail: return "BadEmail";
        case ErrorCode::BadPhone: return "BadPhone";
        case ErrorCode::FieldErrors: return "FieldErrors";
        case ErrorCode::AlreadyLocked: return "AlreadyLocked";
        case ErrorCode::CorruptStore: return "CorruptStore";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::BlobTooLarge: return "BlobTooLarge";
        case ErrorCode::BlobNotFound: return "BlobNotFound";
        case ErrorCode::IntegrityFailure: return "IntegrityFailure";
        case ErrorCode::UniqueViolation: return "UniqueViolation";
        case ErrorCode::ImmutableKind: return "ImmutableKind";
        case ErrorCode::ForeignKeyViolation: return "ForeignKeyViolation";
        case ErrorCode::UnknownField: return "UnknownField";
        case ErrorCode::HasDependents: return "HasDependents";
        case ErrorCode::Forbidden: return "Forbidden";
        case ErrorCode::DuplicateUserId: return "DuplicateUserId";
        case ErrorCode::WeakPassword: return "WeakPassword";
        case ErrorCode::UnknownUser: return "UnknownUser";
        case ErrorCode::LoginError: return "LoginError";
        case ErrorCode::InvalidSession: return "InvalidSession";
        case ErrorCode::CannotModifyAdministrator: return "CannotModifyAdministrator";
        case ErrorCode::UnknownRole: return "UnknownRole";
        case ErrorCode::EmptyDescription: return "EmptyDescription";
        case ErrorCode::DuplicateCardNumber: return "DuplicateCardNumber";
        case ErrorCode::UnknownPatient: return "UnknownPatient";
        case ErrorCode::DuplicateCategory: return "DuplicateCategory";
        case ErrorCode::UnknownCategory: return "UnknownCategory";
        case ErrorCode::UnknownPatientCard: return "UnknownPatientCard";
        case ErrorCode::UnknownScan: return "UnknownScan";
        case ErrorCode::UnsupportedMediaType: return "UnsupportedMediaType";
        case ErrorCode::EmptyTerm: return "EmptyTerm";
        case ErrorCode::BadPaging: return "BadPaging";
        case ErrorCode::ConfigParseError: return "ConfigParseError";
        case ErrorCode::BadRequest: return "BadRequest";
        case ErrorCode::AlreadyInitialized: return "AlreadyInitialized";
        case ErrorCode::StoreNotInitialized: return "StoreNotInitialized";
        case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
}

Error::Error(ErrorCode code, std::string message)
    : std::runtime_error(std::move(message)), code_(code) {}

Error::Error(ErrorCode code, std::string message, std::string field)
    : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)) {}

Error::Error(ErrorCode code, std::string message, std::vector<FieldError> fields)
    : std::runtime_error(std::move(message)), code_(code), fields_(std::move(fields)) {}

Error Error::dependents(std::size_t count) {
    Error e(ErrorCode::HasDependents,
            "record has " + std::to_string(count) + " dependent record(s)");
    e.count_ = count;
    return e;
}

}  // namespace archivist
