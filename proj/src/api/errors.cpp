#include "archivist/api/errors.hpp"

#include <cctype>

namespace archivist::api {

std::string wire_code(ErrorCode code) {
    const auto name = to_string(code);
    std::string out;
    out.reserve(name.size() + 4);
    for (char c : name) {
        if (std::isupper(static_cast<unsigned char>(c))) {
            if (!out.empty()) out.push_back('_');
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            out.push_back(c);
        }
    }
    return out;
}

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyCardNumber:
        case ErrorCode::CardNumberTooLong:
        case ErrorCode::BadEmail:
        case ErrorCode::BadPhone:
        case ErrorCode::FieldErrors:
        case ErrorCode::UnknownField:
        case ErrorCode::WeakPassword:
        case ErrorCode::EmptyDescription:
        case ErrorCode::EmptyTerm:
        case ErrorCode::BadPaging:
        case ErrorCode::BadRequest:
        case ErrorCode::ConfigParseError:
            return 400;
        case ErrorCode::LoginError:
        case ErrorCode::InvalidSession:
            return 401;
        case ErrorCode::Forbidden:
            return 403;
        case ErrorCode::UnknownUser:
        case ErrorCode::UnknownRole:
        case ErrorCode::UnknownPatient:
        case ErrorCode::UnknownCategory:
        case ErrorCode::UnknownScan:
            return 404;
        case ErrorCode::UniqueViolation:
        case ErrorCode::ImmutableKind:
        case ErrorCode::ForeignKeyViolation:
        case ErrorCode::HasDependents:
        case ErrorCode::DuplicateUserId:
        case ErrorCode::CannotModifyAdministrator:
        case ErrorCode::DuplicateCardNumber:
        case ErrorCode::DuplicateCategory:
        case ErrorCode::AlreadyInitialized:
            return 409;
        case ErrorCode::BlobTooLarge:
            return 413;
        case ErrorCode::UnsupportedMediaType:
            return 415;
        case ErrorCode::UnknownPatientCard:
            return 422;
        case ErrorCode::IntegrityFailure:
        case ErrorCode::BlobNotFound:
            return 500;
        case ErrorCode::AlreadyLocked:
        case ErrorCode::CorruptStore:
        case ErrorCode::IoFailure:
        case ErrorCode::StoreNotInitialized:
        case ErrorCode::Internal:
            return 500;
    }
    return 500;
}

Json envelope(std::string_view message, std::string_view code, std::string_view request_id) {
    return Json{{"error", message}, {"code", code}, {"request_id", request_id}};
}

namespace {

// Codes whose messages may carry paths or storage detail.
bool opaque(ErrorCode code) {
    switch (code) {
        case ErrorCode::AlreadyLocked:
        case ErrorCode::CorruptStore:
        case ErrorCode::IoFailure:
        case ErrorCode::StoreNotInitialized:
        case ErrorCode::Internal:
            return true;
        default:
            return false;
    }
}

}  // namespace

MappedError map_error(const Error& e, std::string_view request_id) {
    if (opaque(e.code())) return map_unexpected(request_id);
    MappedError m;
    m.status = http_status(e.code());
    std::string message = e.what();
    if (e.code() == ErrorCode::IntegrityFailure) message = "stored image failed integrity verification";
    if (e.code() == ErrorCode::BlobNotFound) message = "stored image is missing";
    m.envelope = envelope(message, wire_code(e.code()), request_id);
    if (!e.field().empty()) m.envelope["field"] = e.field();
    if (!e.field_errors().empty()) {
        Json fields = Json::array();
        for (const auto& f : e.field_errors()) {
            fields.push_back({{"field", f.field}, {"code", wire_code(f.code)}});
        }
        m.envelope["fields"] = std::move(fields);
    }
    return m;
}

MappedError map_unexpected(std::string_view request_id) {
    return {500, envelope("internal error", "internal", request_id)};
}

MappedError map_current_exception(std::string_view request_id) {
    try {
        throw;
    } catch (const Error& e) {
        return map_error(e, request_id);
    } catch (...) {
        return map_unexpected(request_id);
    }
}

}  // namespace archivist::api
