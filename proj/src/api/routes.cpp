#include "archivist/api/routes.hpp"

#include <array>

namespace archivist::api {

namespace {

using P = auth::PrivilegeName;

constexpr std::array kRoutes = {
    RouteSpec{"POST", "/api/login", Access::Public, std::nullopt},
    RouteSpec{"POST", "/api/logout", Access::Session, std::nullopt},
    RouteSpec{"GET", "/api/health", Access::Public, std::nullopt},
    RouteSpec{"GET", "/api/patients", Access::Privilege, P::Patients},
    RouteSpec{"POST", "/api/patients", Access::Administrator, P::Patients},
    RouteSpec{"PUT", "/api/patients/{id}", Access::Administrator, P::Patients},
    RouteSpec{"DELETE", "/api/patients/{id}", Access::Administrator, P::Patients},
    RouteSpec{"GET", "/api/patients/{id}/scans", Access::Privilege, P::PatientImages},
    RouteSpec{"GET", "/api/categories", Access::Session, std::nullopt},
    RouteSpec{"POST", "/api/categories", Access::Privilege, P::PatientImages},
    RouteSpec{"PUT", "/api/categories/{id}", Access::Privilege, P::PatientImages},
    RouteSpec{"POST", "/api/scans", Access::Privilege, P::PatientImages},
    // Ahead of /api/scans/{id} so "search" is not taken for an id.
    RouteSpec{"GET", "/api/scans/search", Access::Privilege, P::PatientImages},
    RouteSpec{"GET", "/api/scans/{id}", Access::Privilege, P::PatientImages},
    RouteSpec{"GET", "/api/scans/{id}/image", Access::Privilege, P::PatientImages},
    RouteSpec{"GET", "/api/users", Access::Privilege, P::ManageUsers},
    RouteSpec{"POST", "/api/users", Access::Privilege, P::ManageUsers},
    RouteSpec{"PUT", "/api/users/{id}", Access::Privilege, P::ManageUsers},
    RouteSpec{"GET", "/api/roles", Access::Privilege, P::ManageUsers},
    RouteSpec{"POST", "/api/roles", Access::Privilege, P::ManageUsers},
    RouteSpec{"PUT", "/api/roles/{id}", Access::Privilege, P::ManageUsers},
    RouteSpec{"POST", "/api/roles/{id}/assign/{user_id}", Access::Privilege, P::ManageUsers},
    RouteSpec{"GET", "/api/audit", Access::Privilege, P::ManageUsers},
    RouteSpec{"POST", "/api/admin/purge-expired", Access::Administrator, P::ManageUsers},
};

}  // namespace

std::span<const RouteSpec> route_table() { return kRoutes; }

std::string path_regex(std::string_view path_template) {
    std::string out;
    for (std::size_t i = 0; i < path_template.size(); ++i) {
        const char c = path_template[i];
        if (c == '{') {
            const auto close = path_template.find('}', i);
            out += "([^/]+)";
            i = close;
        } else if (c == '.' || c == '+' || c == '?' || c == '*' || c == '(' || c == ')') {
            out.push_back('\\');
            out.push_back(c);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace archivist::api
