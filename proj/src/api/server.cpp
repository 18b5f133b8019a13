#include "archivist/api/server.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <map>
#include <httplib.h>

#include "archivist/api/errors.hpp"
#include "archivist/api/routes.hpp"
#include "archivist/crypto.hpp"
#include "archivist/error.hpp"

namespace archivist::api {

namespace {

using auth::PrivilegeName;
using search::ScanCriterion;

constexpr std::string_view kJson = "application/json";
constexpr std::size_t kDefaultPageSize = 50;
// Room for multipart headers and the text fields around the image part.
constexpr std::size_t kMultipartSlack = 1024 * 1024;

std::string new_request_id() { return crypto::to_hex(crypto::random_bytes(8)); }

[[noreturn]] void bad_request(const std::string& message, const std::string& field = {}) {
    if (field.empty()) throw Error(ErrorCode::BadRequest, message);
    throw Error(ErrorCode::BadRequest, message, field);
}

struct Call {
    const httplib::Request& req;
    httplib::Response& res;
    std::string request_id;
    UserAccount actor;

    std::string param(std::size_t i) const { return req.matches[static_cast<int>(i)].str(); }

    std::optional<std::string> query(const char* key) const {
        if (!req.has_param(key)) return std::nullopt;
        return req.get_param_value(key);
    }

    Json body() const {
        if (req.body.empty()) return Json::object();
        Json j = Json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) bad_request("request body must be a JSON object");
        return j;
    }

    void json(int status, const Json& j) {
        res.status = status;
        res.set_content(j.dump(), std::string(kJson));
    }
};

std::string text_member(const Json& j, const char* key, bool required = true) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) bad_request(std::string("missing field ") + key, key);
        return {};
    }
    if (!it->is_string()) bad_request(std::string(key) + " must be a string", key);
    return it->get<std::string>();
}

std::size_t paging_value(const Call& c, const char* key, std::size_t fallback) {
    const auto raw = c.query(key);
    if (!raw) return fallback;
    std::size_t v = 0;
    const auto* end = raw->data() + raw->size();
    auto [p, ec] = std::from_chars(raw->data(), end, v);
    if (raw->empty() || ec != std::errc{} || p != end) {
        throw Error(ErrorCode::BadPaging, std::string(key) + " must be a non-negative integer", key);
    }
    return v;
}

std::optional<Timestamp> time_query(const Call& c, const char* key) {
    const auto raw = c.query(key);
    if (!raw || raw->empty()) return std::nullopt;
    auto t = parse_rfc3339(*raw);
    if (!t) bad_request(std::string(key) + " must be an RFC 3339 timestamp", key);
    return t;
}

// Overlays the body onto a default-constructed record's serialized form, so
// omitted keys take defaults and unknown keys are rejected.
template <typename T>
T decode_partial(const Json& body, std::initializer_list<std::string_view> ignored) {
    Json base = T{};
    for (const auto& [key, value] : body.items()) {
        bool skip = false;
        for (auto k : ignored) skip = skip || key == k;
        if (skip) continue;
        if (!base.contains(key)) bad_request("unknown field " + key, key);
        base[key] = value;
    }
    return decode<T>(base);
}

template <typename T>
Json page_json(const search::Page<T>& page) {
    Json items = Json::array();
    for (const auto& item : page.items) items.push_back(item);
    return Json{{"items", std::move(items)},
                {"total_matches", page.total_matches},
                {"offset", page.offset},
                {"limit", page.limit}};
}

Json labels(const std::set<PrivilegeName>& privileges) {
    Json out = Json::array();
    for (auto p : privileges) out.push_back(label(p));
    return out;
}

std::set<PrivilegeName> parse_privileges(const Json& body) {
    auto it = body.find("privileges");
    if (it == body.end() || !it->is_array()) bad_request("privileges must be an array", "privileges");
    std::set<PrivilegeName> out;
    for (const auto& item : *it) {
        auto p = item.is_string() ? auth::parse_privilege(item.get<std::string>()) : std::nullopt;
        if (!p) bad_request("unknown privilege", "privileges");
        out.insert(*p);
    }
    return out;
}

Json role_json(const storage::Reader& r, const Role& role) {
    Json j = role_row(role);
    std::set<PrivilegeName> held;
    for (auto p : auth::kAllPrivileges) {
        auto rec = auth::privilege_record(r, p);
        if (rec && role.privilege_ids.count(rec->privilege_id)) held.insert(p);
    }
    j["privileges"] = labels(held);
    return j;
}

std::string multipart_text(const httplib::Request& req, const char* key, bool required) {
    if (!req.has_file(key)) {
        if (required) bad_request(std::string("missing form field ") + key, key);
        return {};
    }
    return req.get_file_value(key).content;
}

Timestamp form_time(const std::string& raw, const char* field) {
    auto t = parse_rfc3339(raw);
    if (!t) {
        throw Error(ErrorCode::FieldErrors, std::string(field) + " must be an RFC 3339 timestamp",
                    std::vector<FieldError>{{field, ErrorCode::BadRequest}});
    }
    return *t;
}

std::string fallback_code(int status) {
    switch (status) {
        case 400: return "bad_request";
        case 404: return "not_found";
        case 405: return "method_not_allowed";
        case 413: return wire_code(ErrorCode::BlobTooLarge);
        case 414: return "uri_too_long";
        case 416: return "range_not_satisfiable";
        default: return status >= 500 ? "internal" : "http_error";
    }
}

void reuse_addr_only(socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
}

}  // namespace

struct Server::Impl {
    Services svc;
    ServerOptions options;
    httplib::Server http;

    using Handler = std::function<void(Call&)>;

    Impl(Services s, ServerOptions o) : svc(s), options(std::move(o)) {
        http.set_socket_options(reuse_addr_only);
        http.set_payload_max_length(options.max_image_bytes + kMultipartSlack);
        http.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
            return on_http_error(req, res);
        });
        http.set_exception_handler(
            [](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
                const auto m = map_unexpected(new_request_id());
                res.status = m.status;
                res.set_content(m.envelope.dump(), std::string(kJson));
            });
        if (options.access_log) {
            http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
                options.access_log(req.method + " " + req.path + " " + std::to_string(res.status) +
                                   " " + res.get_header_value("X-Request-Id"));
            });
        }
        register_routes();
    }

    // Unmatched routes and httplib's own rejections (oversized payloads,
    // malformed requests) get the same envelope as everything else.
    httplib::Server::HandlerResponse on_http_error(const httplib::Request& req,
                                                   httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        std::string id = new_request_id();
        Json env;
        if (res.status == 404 && req.path.rfind("/api/", 0) == 0 && !has_session(req)) {
            res.status = 401;
            env = envelope("invalid or expired session", wire_code(ErrorCode::InvalidSession), id);
        } else if (res.status == 413) {
            env = envelope("request body exceeds the configured image size limit",
                           fallback_code(413), id);
        } else {
            env = envelope(httplib::status_message(res.status), fallback_code(res.status), id);
        }
        res.set_header("X-Request-Id", id);
        res.set_content(env.dump(), std::string(kJson));
        return httplib::Server::HandlerResponse::Handled;
    }

    static std::optional<std::string> bearer(const httplib::Request& req) {
        const auto header = req.get_header_value("Authorization");
        constexpr std::string_view scheme = "Bearer ";
        if (header.size() <= scheme.size() || header.compare(0, scheme.size(), scheme) != 0) {
            return std::nullopt;
        }
        return header.substr(scheme.size());
    }

    bool has_session(const httplib::Request& req) const {
        const auto token = bearer(req);
        if (!token) return false;
        try {
            svc.auth.resolve_session(*token);
            return true;
        } catch (const Error&) {
            return false;
        }
    }

    void authorize(Call& c, const RouteSpec& spec) {
        const auto token = bearer(c.req);
        if (!token) throw Error(ErrorCode::InvalidSession, "invalid or expired session");
        c.actor = svc.auth.resolve_session(*token);
        if (spec.access == Access::Session) return;

        const bool allowed = svc.store.read([&](const storage::Reader& r) {
            if (!auth::check_privilege(r, c.actor, *spec.privilege)) return false;
            return spec.access != Access::Administrator || auth::is_administrator(r, c.actor);
        });
        if (allowed) return;

        std::string what = spec.path == "/api/scans/{id}/image"
                               ? "denied image access: " + c.param(1)
                               : "denied request: " + std::string(spec.method) + " " +
                                     std::string(spec.path);
        svc.auth.append_audit(c.actor.user_id, what);
        throw Error(ErrorCode::Forbidden, "insufficient privileges", std::string(label(*spec.privilege)));
    }

    void route(std::string_view method, std::string_view path, Handler h) {
        const RouteSpec* spec = nullptr;
        for (const auto& r : route_table()) {
            if (r.method == method && r.path == path) spec = &r;
        }
        if (spec == nullptr) throw Error(ErrorCode::Internal, "route missing from table");
        auto wrapped = [this, spec, h = std::move(h)](const httplib::Request& req,
                                                       httplib::Response& res) {
            Call c{req, res, new_request_id(), {}};
            res.set_header("X-Request-Id", c.request_id);
            try {
                if (spec->access != Access::Public) authorize(c, *spec);
                h(c);
            } catch (...) {
                const auto m = map_current_exception(c.request_id);
                c.json(m.status, m.envelope);
            }
        };
        const auto pattern = path_regex(path);
        if (method == "GET") {
            http.Get(pattern, wrapped);
        } else if (method == "POST") {
            http.Post(pattern, wrapped);
        } else if (method == "PUT") {
            http.Put(pattern, wrapped);
        } else if (method == "DELETE") {
            http.Delete(pattern, wrapped);
        }
    }

    void register_routes();
};

void Server::Impl::register_routes() {
    route("POST", "/api/login", [this](Call& c) {
        const Json body = c.body();
        auth::Credentials cred{text_member(body, "user_id"), text_member(body, "password")};
        const auto result = svc.auth.login(cred);
        c.json(200, Json{{"token", result.session.token},
                         {"expires_at", timestamp_json(result.session.expires_at)},
                         {"user", public_user_json(result.user)},
                         {"privileges", labels(result.privileges)},
                         {"administrator", result.administrator}});
    });
    route("POST", "/api/logout", [this](Call& c) {
        svc.auth.logout(*bearer(c.req));
        c.json(200, Json{{"status", "ok"}});
    });
    route("GET", "/api/health", [this](Call& c) {
        c.json(200, Json{{"status", "ok"}, {"banner", options.banner}});
    });

    route("GET", "/api/patients", [this](Call& c) {
        const auto page = svc.search.search_patients(c.actor, c.query("term").value_or(""),
                                                     paging_value(c, "offset", 0),
                                                     paging_value(c, "limit", kDefaultPageSize));
        c.json(200, page_json(page));
    });
    route("POST", "/api/patients", [this](Call& c) {
        auto candidate = decode_partial<PatientRecord>(c.body(), {"patient_id"});
        const auto id = svc.archive.register_patient(c.actor, candidate);
        auto stored = svc.store.load_entity(storage::EntityKind::Patient, id);
        c.json(201, stored ? *stored : Json{{"patient_id", id}});
    });
    route("PUT", "/api/patients/{id}", [this](Call& c) {
        c.json(200, svc.archive.update_patient(c.actor, c.param(1), c.body()));
    });
    route("DELETE", "/api/patients/{id}", [this](Call& c) {
        svc.archive.delete_patient(c.actor, c.param(1));
        c.json(200, Json{{"deleted", c.param(1)}});
    });
    route("GET", "/api/patients/{id}/scans", [this](Call& c) {
        c.json(200, svc.archive.list_scans_for_patient(c.actor, c.param(1)));
    });

    route("GET", "/api/categories", [this](Call& c) {
        c.json(200, svc.archive.list_scan_categories(c.actor));
    });
    route("POST", "/api/categories", [this](Call& c) {
        const Json body = c.body();
        c.json(201, svc.archive.create_scan_category(c.actor, text_member(body, "category_name"),
                                                     text_member(body, "category_description", false)));
    });
    route("PUT", "/api/categories/{id}", [this](Call& c) {
        const Json body = c.body();
        c.json(200, svc.archive.update_scan_category(c.actor, c.param(1),
                                                     text_member(body, "category_name"),
                                                     text_member(body, "category_description", false)));
    });

    route("POST", "/api/scans", [this](Call& c) {
        if (!c.req.is_multipart_form_data()) bad_request("expected multipart/form-data");
        ScanUploadRequest up;
        up.card_number = multipart_text(c.req, "card_number", true);
        up.scan_category_id = multipart_text(c.req, "scan_category_id", true);
        up.radiographer = multipart_text(c.req, "radiographer", false);
        up.scan_details = multipart_text(c.req, "scan_details", false);
        up.findings = multipart_text(c.req, "findings", false);
        up.scan_date = form_time(multipart_text(c.req, "scan_date", true), "scan_date");
        if (auto expiry = multipart_text(c.req, "expiry", false); !expiry.empty()) {
            up.expiry = form_time(expiry, "expiry");
        }
        if (!c.req.has_file("image")) bad_request("missing image part", "image");
        const auto& image = c.req.get_file_value("image");
        up.image_bytes = image.content;
        up.image_media_type = image.content_type.empty() ? "application/octet-stream" : image.content_type;
        const auto id = svc.archive.upload_scan(c.actor, up);
        c.json(201, svc.archive.get_scan(c.actor, id));
    });
    route("GET", "/api/scans/search", [this](Call& c) {
        const auto by = c.query("by");
        const auto criterion = by ? search::parse_criterion(*by) : std::nullopt;
        if (!criterion) bad_request("by must name a search criterion", "by");
        const auto page = svc.search.search_scans(c.actor, *criterion, c.query("term").value_or(""),
                                                  paging_value(c, "offset", 0),
                                                  paging_value(c, "limit", kDefaultPageSize));
        c.json(200, page_json(page));
    });
    route("GET", "/api/scans/{id}", [this](Call& c) {
        c.json(200, svc.archive.get_scan(c.actor, c.param(1)));
    });
    route("GET", "/api/scans/{id}/image", [this](Call& c) {
        auto image = svc.archive.get_scan_image(c.actor, c.param(1));
        c.res.status = 200;
        c.res.set_header("X-Content-SHA256", image.digest);
        c.res.set_header("ETag", "\"" + image.digest + "\"");
        c.res.set_header("Cache-Control", "no-store");
        c.res.set_content(std::move(image.bytes), image.media_type);
    });

    route("GET", "/api/users", [this](Call& c) {
        Json out = Json::array();
        for (const auto& u : svc.auth.list_users(c.actor)) out.push_back(public_user_json(u));
        c.json(200, out);
    });
    route("POST", "/api/users", [this](Call& c) {
        const Json body = c.body();
        if (body.contains("password_digest")) bad_request("password_digest is not settable", "password_digest");
        std::string password = text_member(body, "password");
        auto candidate = decode_partial<UserAccount>(body, {"password"});
        try {
            const auto id = svc.auth.create_user(c.actor, candidate, password);
            crypto::cleanse(password);
            auto stored = svc.store.load_entity(storage::EntityKind::UserAccount, id);
            c.json(201, public_user_json(decode<UserAccount>(*stored)));
        } catch (...) {
            crypto::cleanse(password);
            throw;
        }
    });
    route("PUT", "/api/users/{id}", [this](Call& c) {
        c.json(200, public_user_json(svc.auth.update_user(c.actor, c.param(1), c.body())));
    });

    route("GET", "/api/roles", [this](Call& c) {
        const auto roles = svc.auth.list_roles(c.actor);
        c.json(200, svc.store.read([&](const storage::Reader& r) {
            Json out = Json::array();
            for (const auto& role : roles) out.push_back(role_json(r, role));
            return out;
        }));
    });
    route("POST", "/api/roles", [this](Call& c) {
        const Json body = c.body();
        const auto role = svc.auth.create_or_update_role(c.actor, text_member(body, "role_name"),
                                                         text_member(body, "description", false),
                                                         parse_privileges(body));
        c.json(201, svc.store.read([&](const storage::Reader& r) { return role_json(r, role); }));
    });
    route("PUT", "/api/roles/{id}", [this](Call& c) {
        const Json body = c.body();
        auth::RoleChanges changes;
        for (const auto& [key, value] : body.items()) {
            if (key != "role_name" && key != "status" && key != "privileges" && key != "role_id" &&
                key != "description") {
                bad_request("unknown field " + key, key);
            }
        }
        if (body.contains("role_name")) changes.role_name = text_member(body, "role_name");
        if (body.contains("status")) {
            changes.status = parse_status(text_member(body, "status"));
            if (!changes.status) bad_request("status must be enabled or disabled", "status");
        }
        if (body.contains("privileges")) changes.privileges = parse_privileges(body);
        const auto role = svc.auth.update_role(c.actor, c.param(1), changes);
        c.json(200, svc.store.read([&](const storage::Reader& r) { return role_json(r, role); }));
    });
    route("POST", "/api/roles/{id}/assign/{user_id}", [this](Call& c) {
        svc.auth.assign_role(c.actor, c.param(2), c.param(1));
        c.json(200, Json{{"user_id", c.param(2)}, {"role_id", c.param(1)}});
    });

    route("GET", "/api/audit", [this](Call& c) {
        auth::AuditFilter filter;
        if (auto user = c.query("user_id"); user && !user->empty()) filter.user_id = *user;
        filter.from = time_query(c, "from");
        filter.to = time_query(c, "to");
        c.json(200, svc.auth.query_audit(c.actor, filter));
    });
    route("POST", "/api/admin/purge-expired", [this](Call& c) {
        c.json(200, Json{{"purged", svc.archive.purge_expired_scans(c.actor)}});
    });
}

Server::Server(Services services, ServerOptions options)
    : impl_(std::make_unique<Impl>(services, std::move(options))) {}

Server::~Server() {
    if (impl_->http.is_running()) impl_->http.stop();
}

int Server::bind(const std::string& host, int port) {
    if (port == 0) return impl_->http.bind_to_any_port(host);
    return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

bool Server::is_running() const { return impl_->http.is_running(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

bool Server::port_available(const std::string& host, int port) {
    if (port == 0) return true;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* found = nullptr;
    const auto service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &found) != 0) return false;
    bool ok = false;
    for (auto* ai = found; ai != nullptr && !ok; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        reuse_addr_only(fd);
        ok = ::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0;
        ::close(fd);
    }
    ::freeaddrinfo(found);
    return ok;
}

}  // namespace archivist::api
