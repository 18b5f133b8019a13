#pragma once

// The route table doubles as the permission matrix: the server registers
// exactly these routes and gates each one as declared here.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "archivist/auth/rbac.hpp"

namespace archivist::api {

enum class Access {
    Public,         // no session
    Session,        // any valid session
    Privilege,      // session + privilege
    Administrator,  // session + privilege + Administrator role
};

struct RouteSpec {
    std::string_view method;
    // Path template with {name} placeholders.
    std::string_view path;
    Access access = Access::Session;
    std::optional<auth::PrivilegeName> privilege;
};

std::span<const RouteSpec> route_table();

// Path template as an anchored regex: each {name} becomes ([^/]+).
std::string path_regex(std::string_view path_template);

}  // namespace archivist::api
