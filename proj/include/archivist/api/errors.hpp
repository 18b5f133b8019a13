#pragma once

#include <exception>
#include <string>
#include <string_view>

#include "archivist/domain/serialize.hpp"
#include "archivist/error.hpp"

namespace archivist::api {

// snake_case rendering of the enumerator: DuplicateCardNumber ->
// "duplicate_card_number".
std::string wire_code(ErrorCode code);

int http_status(ErrorCode code) noexcept;

struct MappedError {
    int status = 500;
    // {error, code, request_id}, plus "field" / "fields" for validation
    // failures.
    Json envelope;
};

MappedError map_error(const Error& e, std::string_view request_id);
// Anything that is not an archivist::Error: 500 "internal", no detail.
MappedError map_unexpected(std::string_view request_id);
MappedError map_current_exception(std::string_view request_id);

Json envelope(std::string_view message, std::string_view code, std::string_view request_id);

}  // namespace archivist::api
