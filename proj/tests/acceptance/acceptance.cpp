// Acceptance run: one line per criterion, nonzero exit when any fails.
//
//   acceptance            all criteria
//   acceptance 4 8        a subset

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "archivist/api/routes.hpp"
#include "archivist/storage/entity_kind.hpp"
#include "support/api_world.hpp"
#include "support/http_matrix.hpp"
#include "support/process.hpp"

using namespace archivist;
using archivist::storage::EntityKind;
using archivist::testing::ApiWorld;
using archivist::testing::body_json;
using archivist::testing::Gen;
using archivist::testing::Process;
using archivist::testing::ServedStore;
using archivist::testing::TempDir;

namespace fs = std::filesystem;
using namespace std::chrono_literals;
using SteadyClock = std::chrono::steady_clock;

namespace {

const std::string kBin = ARCHIVIST_BIN;
const std::string kAdminPassword = testing::kAdminPassword;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Collects failed expectations; the first few end up in the report line.
class Checker {
public:
    bool expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures_;
            if (messages_.size() < 5) messages_.push_back(what);
        }
        return ok;
    }

    Outcome finish(const std::string& summary) const {
        if (failures_ == 0) return {true, summary};
        std::string detail = std::to_string(failures_) + " failed check(s): ";
        for (std::size_t i = 0; i < messages_.size(); ++i) detail += (i ? "; " : "") + messages_[i];
        return {false, detail};
    }

private:
    std::size_t failures_ = 0;
    std::vector<std::string> messages_;
};

double seconds_since(SteadyClock::time_point start) {
    return std::chrono::duration<double>(SteadyClock::now() - start).count();
}

std::string fixed(double v, int places = 1) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string random_bytes(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::string out(n, '\0');
    std::size_t i = 0;
    while (i < n) {
        std::uint64_t v = rng();
        for (int b = 0; b < 8 && i < n; ++b, ++i) {
            out[i] = static_cast<char>(v & 0xff);
            v >>= 8;
        }
    }
    return out;
}

httplib::Headers bearer(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

std::string login(httplib::Client& c, const std::string& user, const std::string& password) {
    auto res = c.Post("/api/login", Json{{"user_id", user}, {"password", password}}.dump(), "application/json");
    if (!res || res->status != 200) return {};
    return Json::parse(res->body).at("token").get<std::string>();
}

struct UploadForm {
    std::string card;
    std::string category_id;
    std::string radiographer = "Dr. Akpan";
    std::string scan_date = "2026-01-05T09:00:00Z";
    std::string expiry;
    std::string details = "chest PA";
    std::string findings = "no acute findings";
    std::string media_type = "image/png";
};

httplib::Result upload(httplib::Client& c, const std::string& token, const UploadForm& f,
                       const std::string& bytes) {
    httplib::MultipartFormDataItems items = {
        {"card_number", f.card, "", ""},
        {"scan_category_id", f.category_id, "", ""},
        {"radiographer", f.radiographer, "", ""},
        {"scan_date", f.scan_date, "", ""},
        {"scan_details", f.details, "", ""},
        {"findings", f.findings, "", ""},
        {"image", bytes, "scan.bin", f.media_type},
    };
    if (!f.expiry.empty()) items.push_back({"expiry", f.expiry, "", ""});
    return c.Post("/api/scans", bearer(token), items);
}

// Every page of a paged search, concatenated.
Json all_pages(httplib::Client& c, const std::string& token, const std::string& path, httplib::Params params,
               std::size_t* total = nullptr) {
    Json items = Json::array();
    std::size_t offset = 0;
    while (true) {
        auto p = params;
        p.emplace("offset", std::to_string(offset));
        p.emplace("limit", "200");
        auto res = c.Get(path, p, bearer(token));
        if (!res || res->status != 200) {
            throw std::runtime_error(path + " returned " + (res ? std::to_string(res->status) : "no response"));
        }
        const auto j = Json::parse(res->body);
        for (const auto& item : j.at("items")) items.push_back(item);
        if (total != nullptr) *total = j.at("total_matches").get<std::size_t>();
        offset += 200;
        if (offset >= j.at("total_matches").get<std::size_t>()) break;
    }
    return items;
}

// ---- shared seeded archive ----------------------------------------------

struct SeededArchive {
    TempDir dir;
    fs::path data;
    bool ok = false;
    std::string problem;
};

SeededArchive& seeded() {
    static const std::unique_ptr<SeededArchive> s = [] {
        auto a = std::make_unique<SeededArchive>();
        a->data = a->dir / "data";
        auto init = testing::run({kBin, "init-admin", "--data-dir", a->data.string()},
                                 {{"ARCHIVIST_ADMIN_PASSWORD", kAdminPassword}});
        if (init.exit_code != 0) {
            a->problem = "init-admin exited " + std::to_string(init.exit_code);
            return a;
        }
        auto seed = testing::run({kBin, "seed-demo", "--data-dir", a->data.string(), "--patients", "1000",
                                  "--scans", "3000", "--seed", "42"});
        if (seed.exit_code != 0) {
            a->problem = "seed-demo exited " + std::to_string(seed.exit_code);
            return a;
        }
        a->ok = true;
        return a;
    }();
    return *s;
}

// ---- 1: schema ----------------------------------------------------------

// Column lists of the eight tables as written in the original design, before
// the identifier conventions of this code base are applied.
const std::vector<std::pair<std::string, std::string>> kDesignTables = {
    {"SCAN_CATEGORIES", "Scan id, Category_Name, Category_Description"},
    {"SCANS", "Scan id, Patient_Id, Scan_Category_ID, Radiographer, Scan_Image, Scan_Timestamp, Expiry, "
              "Scan_Details, Comments"},
    {"PATIENT", "Patient Id, First_Name, Last_Name, Address, Phone, Email, Sex, Card_Number, Photo"},
    {"AUDIT_TRAIL", "Log Id, User_Id, Event_Description, Event_Timestamp"},
    {"USER_ACCOUNTS", "User Id, User_Password, Title, First_Name, Last_Name, Sex, Phone, Email, Address, Photo, "
                      "User_Profession, Account_Status"},
    {"SYSTEM_PRIVILEGES", "Privilege Id, Privilege_Description, Status"},
    {"ROLE", "Role Id, Role_Name, Status"},
    {"ROLE_PRIVILEGES", "sn, Role_Id, Privilege_Id"},
};

std::string snake(std::string s) {
    for (auto& ch : s) ch = ch == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::map<std::string, std::set<std::string>> expected_schema() {
    const std::map<std::string, std::string> kind_of = {
        {"SCAN_CATEGORIES", "scan_categories"}, {"SCANS", "scans"},
        {"PATIENT", "patients"},                {"AUDIT_TRAIL", "audit_trail"},
        {"USER_ACCOUNTS", "user_accounts"},     {"SYSTEM_PRIVILEGES", "system_privileges"},
        {"ROLE", "roles"},                      {"ROLE_PRIVILEGES", "role_privileges"},
    };
    std::map<std::string, std::set<std::string>> out;
    for (const auto& [table, columns] : kDesignTables) {
        auto& fields = out[kind_of.at(table)];
        std::stringstream in(columns);
        for (std::string col; std::getline(in, col, ',');) {
            col.erase(0, col.find_first_not_of(' '));
            fields.insert(snake(col));
        }
    }
    // The documented differences.
    auto& categories = out.at("scan_categories");
    categories.erase("scan_id");
    categories.insert("category_id");
    auto& users = out.at("user_accounts");
    users.erase("user_password");
    users.insert("password_digest");
    users.insert("role_id");
    return out;
}

std::set<std::string> keys_of(const Json& j) {
    std::set<std::string> out;
    for (const auto& [k, v] : j.items()) out.insert(k);
    return out;
}

std::string join(const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
    return out;
}

Outcome criterion_schema() {
    Checker check;
    TempDir t;
    const auto data = t / "data";
    auto init = testing::run({kBin, "init-admin", "--data-dir", data.string()},
                             {{"ARCHIVIST_ADMIN_PASSWORD", kAdminPassword}});
    if (!check.expect(init.exit_code == 0, "init-admin exited " + std::to_string(init.exit_code))) {
        return check.finish("");
    }
    const auto expected = expected_schema();
    check.expect(expected.size() == 8, "expected table count");

    std::set<std::string> on_disk;
    for (const auto& entry : fs::directory_iterator(data / "entities")) {
        if (entry.is_directory()) on_disk.insert(entry.path().filename().string());
    }
    std::set<std::string> expected_kinds;
    for (const auto& [k, v] : expected) expected_kinds.insert(k);
    check.expect(on_disk == expected_kinds, "entity directories {" + join(on_disk) + "}");
    check.expect(storage::kAllKinds.size() == 8, "kind count");

    storage::StoreOptions so;
    so.create_if_missing = false;
    auto store = storage::Store::open(data, so);
    std::set<std::string> exposed;
    std::size_t records = 0;
    for (const auto kind : storage::kAllKinds) {
        const auto& sch = storage::schema(kind);
        const std::string name(sch.name);
        exposed.insert(name);
        if (!check.expect(expected.count(name) == 1, "unexpected kind " + name)) continue;
        const auto& want = expected.at(name);
        std::set<std::string> declared(sch.fields.begin(), sch.fields.end());
        check.expect(declared == want, name + " schema fields {" + join(declared) + "}");
        for (const auto& record : store->query_entities(kind)) {
            ++records;
            check.expect(keys_of(record) == want, name + " stored keys {" + join(keys_of(record)) + "}");
        }
    }
    check.expect(exposed == expected_kinds, "store kinds {" + join(exposed) + "}");

    // Kinds still empty after bootstrap: the domain types' own encoding.
    check.expect(keys_of(Json(PatientRecord{})) == expected.at("patients"), "PatientRecord encoding");
    check.expect(keys_of(Json(ScanRecord{})) == expected.at("scans"), "ScanRecord encoding");
    check.expect(keys_of(Json(ScanCategory{})) == expected.at("scan_categories"), "ScanCategory encoding");
    check.expect(keys_of(Json(AuditEntry{})) == expected.at("audit_trail"), "AuditEntry encoding");
    check.expect(keys_of(Json(Privilege{})) == expected.at("system_privileges"), "Privilege encoding");
    check.expect(keys_of(Json(RolePrivilege{})) == expected.at("role_privileges"), "RolePrivilege encoding");
    check.expect(keys_of(Json(UserAccount{})) == expected.at("user_accounts"), "UserAccount encoding");
    store->close();
    return check.finish("8 kinds, fields exact; " + std::to_string(records) + " bootstrap records checked");
}

// ---- 2: RBAC ------------------------------------------------------------

Outcome criterion_rbac() {
    Checker check;
    const auto start = SteadyClock::now();
    ApiWorld w;
    w.user("doctor", w.doctors());
    w.user("radiographer", w.radiographers());
    w.user("norole", std::nullopt);
    w.patient("C-1");
    const auto scan_id = w.archive->upload_scan(w.admin, w.upload_request("C-1", "pixels", w.clock.now()));

    std::set<std::pair<std::string, std::string>> table, expected;
    for (const auto& r : api::route_table()) table.emplace(std::string(r.method), std::string(r.path));
    for (const auto& r : testing::expected_routes()) expected.emplace(r.method, r.path);
    check.expect(table == expected, "route table differs from the permission matrix");

    std::vector<testing::Actor> actors = {
        {"admin", w.admin_token(), {"patients", "patient images", "manage users", "news"}, true},
        {"doctor", w.login("doctor", testing::kUserPassword), {"patients", "patient images", "news"}, false},
        {"radiographer", w.login("radiographer", testing::kUserPassword), {"patients", "patient images"}, false},
        {"norole", w.login("norole", testing::kUserPassword), {}, false},
    };
    auto c = w.client();
    std::size_t probes = 0;
    std::size_t doctor_denials = 0;
    for (const auto& actor : actors) {
        check.expect(!actor.token.empty(), actor.name + " could not log in");
        for (const auto& route : testing::expected_routes()) {
            if (route.path == "/api/logout") continue;
            const auto id = route.path.rfind("/api/scans", 0) == 0 ? scan_id : std::string("P-1");
            const auto path = testing::fill_path(route.path, {{"id", id}, {"user_id", "nobody"}});
            const auto label = actor.name + " " + route.method + " " + path;
            const auto before = w.audit_count();
            auto res = testing::send(c, route.method, path, actor.token);
            ++probes;
            if (!check.expect(static_cast<bool>(res), label + ": no response")) continue;
            if (testing::expected_allowed(route, actor)) {
                check.expect(res->status != 401 && res->status != 403,
                             label + " allowed but got " + std::to_string(res->status));
            } else {
                check.expect(res->status == 403, label + " denied but got " + std::to_string(res->status));
                check.expect(body_json(res).value("code", "") == "forbidden", label + " code");
                check.expect(w.audit_count() == before + 1, label + " denial not audited once");
                if (actor.name == "doctor") ++doctor_denials;
            }
        }
    }

    // The clinical role specifically: no user or role management, no patient
    // registration or removal.
    const auto& doctor = actors[1];
    std::size_t doctor_specific = 0;
    for (const auto& route : testing::expected_routes()) {
        const bool users_or_roles = route.path.rfind("/api/users", 0) == 0 || route.path.rfind("/api/roles", 0) == 0;
        const bool add_or_delete_patient =
            route.path.rfind("/api/patients", 0) == 0 && (route.method == "POST" || route.method == "DELETE");
        if (!users_or_roles && !add_or_delete_patient) continue;
        const auto path = testing::fill_path(route.path, {{"id", "R-1"}, {"user_id", "radiographer"}});
        auto res = testing::send(c, route.method, path, doctor.token);
        ++doctor_specific;
        check.expect(res && res->status == 403, "doctor " + route.method + " " + path + " not 403");
    }
    check.expect(doctor_specific == 9, "doctor-specific route count " + std::to_string(doctor_specific));

    // No session at all: every non-public route is 401.
    for (const auto& route : testing::expected_routes()) {
        if (route.rule == "public") continue;
        const auto path = testing::fill_path(route.path, {{"id", "X-1"}, {"user_id", "u"}});
        auto res = testing::send(c, route.method, path, "");
        ++probes;
        check.expect(res && res->status == 401, "anonymous " + route.method + " " + path + " not 401");
    }
    const double elapsed = seconds_since(start);
    check.expect(elapsed < 60.0, "runtime " + fixed(elapsed) + " s");
    return check.finish(std::to_string(probes) + " probes over 4 actors x " +
                        std::to_string(testing::expected_routes().size()) + " routes, doctor denied " +
                        std::to_string(doctor_denials) + ", " + fixed(elapsed) + " s");
}

// ---- 3: login -----------------------------------------------------------

Outcome criterion_login() {
    Checker check;
    ApiWorld w;
    w.user("retired", w.doctors());
    w.auth->update_user(w.admin, "retired", Json{{"account_status", "disabled"}});
    auto c = w.client();
    const std::string message = "login error, check your password and username";
    std::vector<Json> envelopes;
    for (const auto& [user, password, label] : std::vector<std::tuple<std::string, std::string, std::string>>{
             {"admin", "wrong password!", "wrong password"},
             {"ghost", testing::kUserPassword, "unknown user"},
             {"retired", testing::kUserPassword, "disabled account"}}) {
        auto res = c.Post("/api/login", Json{{"user_id", user}, {"password", password}}.dump(), "application/json");
        if (!check.expect(static_cast<bool>(res), label + ": no response")) continue;
        check.expect(res->status == 401, label + " status " + std::to_string(res->status));
        auto j = body_json(res);
        check.expect(j.value("error", "") == message, label + " message '" + j.value("error", "") + "'");
        check.expect(res->body.find(message) != std::string::npos, label + " message bytes");
        check.expect(j.contains("request_id"), label + " request id");
        j.erase("request_id");
        envelopes.push_back(j);
    }
    for (std::size_t i = 1; i < envelopes.size(); ++i) {
        check.expect(envelopes[i] == envelopes[0], "envelope " + std::to_string(i) + " differs");
    }
    // And the right password still works.
    check.expect(w.login("retired", testing::kUserPassword).empty(), "disabled account logged in");
    check.expect(!w.admin_token().empty(), "admin login failed");
    return check.finish("3 failure modes, 401, identical envelopes: " +
                        (envelopes.empty() ? std::string("{}") : envelopes[0].dump()));
}

// ---- 4: search oracle ---------------------------------------------------

// The oracle's own normalization: ASCII lower case, whitespace runs become
// one space, trimmed.
std::string fold(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (const char ch : raw) {
        const auto u = static_cast<unsigned char>(ch);
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(u < 128 ? static_cast<char>(std::tolower(u)) : ch);
    }
    return out;
}

bool has(const std::string& field, const std::string& folded_term) {
    return fold(field).find(folded_term) != std::string::npos;
}

struct Corpus {
    std::map<std::string, PatientRecord> patients;
    std::vector<ScanRecord> scans;
};

Corpus load_corpus(storage::Store& store) {
    Corpus c;
    for (const auto& j : store.query_entities(EntityKind::Patient)) {
        auto p = decode<PatientRecord>(j);
        c.patients.emplace(p.patient_id, p);
    }
    for (const auto& j : store.query_entities(EntityKind::Scan)) c.scans.push_back(decode<ScanRecord>(j));
    return c;
}

const std::vector<std::string> kCriteria = {"scan_details", "radiographer", "patient_name", "card_number",
                                            "last_name",    "first_name",   "email",        "phone"};

std::vector<std::string> criterion_fields(const std::string& by, const ScanRecord& s, const PatientRecord& p) {
    if (by == "scan_details") return {s.scan_details, s.comments};
    if (by == "radiographer") return {s.radiographer};
    if (by == "patient_name") return {p.first_name, p.last_name};
    if (by == "card_number") return {p.card_number};
    if (by == "last_name") return {p.last_name};
    if (by == "first_name") return {p.first_name};
    if (by == "email") return {p.email};
    return {p.phone};
}

std::set<std::string> oracle(const Corpus& corpus, const std::string& by, const std::string& term) {
    const auto t = fold(term);
    std::set<std::string> out;
    for (const auto& s : corpus.scans) {
        const auto& p = corpus.patients.at(s.patient_id);
        for (const auto& f : criterion_fields(by, s, p)) {
            if (has(f, t)) {
                out.insert(s.scan_id);
                break;
            }
        }
    }
    return out;
}

// A term drawn from the data (a substring of a real field value, with case
// and spacing noise) or, sometimes, random letters.
std::string random_term(Gen& g, const Corpus& corpus, const std::string& by) {
    if (g.below(5) == 0) return g.word(1, 3);
    const auto& s = corpus.scans[g.below(corpus.scans.size())];
    const auto fields = criterion_fields(by, s, corpus.patients.at(s.patient_id));
    std::string source = fields[g.below(fields.size())];
    if (source.empty()) return g.word(1, 2);
    const std::size_t len = 1 + g.below(std::min<std::size_t>(source.size(), 12));
    const std::size_t from = g.below(source.size() - len + 1);
    std::string term = source.substr(from, len);
    for (auto& ch : term) {
        if (g.below(3) == 0) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    if (g.below(4) == 0) term = "  " + term + " ";
    if (fold(term).empty()) return g.word(1, 2);
    return term;
}

Outcome criterion_search() {
    Checker check;
    auto& archive = seeded();
    if (!check.expect(archive.ok, archive.problem)) return check.finish("");
    const auto start = SteadyClock::now();
    ServedStore served(archive.data);
    const auto corpus = load_corpus(*served.store);
    check.expect(corpus.patients.size() == 1000 && corpus.scans.size() == 3000, "seeded corpus size");
    auto c = served.client();
    const auto token = login(c, "admin", kAdminPassword);
    if (!check.expect(!token.empty(), "admin login")) return check.finish("");

    Gen g(20240601);
    std::size_t hits = 0, empty = 0, walkthrough = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        const auto& by = i == 0 ? std::string("radiographer") : kCriteria[i % kCriteria.size()];
        const auto term = i == 0 ? std::string("Dr. Akpan") : random_term(g, corpus, by);
        const auto label = "(" + by + ", \"" + term + "\")";
        std::size_t total = 0;
        Json items;
        try {
            items = all_pages(c, token, "/api/scans/search", {{"by", by}, {"term", term}}, &total);
        } catch (const std::exception& e) {
            check.expect(false, label + " " + e.what());
            continue;
        }
        std::set<std::string> got;
        for (const auto& item : items) got.insert(item.at("scan_id").get<std::string>());
        const auto want = oracle(corpus, by, term);
        check.expect(got == want, label + ": " + std::to_string(got.size()) + " results, oracle " +
                                      std::to_string(want.size()));
        check.expect(got.size() == items.size() && total == items.size(), label + " paging");
        if (i == 0) walkthrough = got.size();
        (got.empty() ? empty : hits) += 1;
    }
    check.expect(walkthrough >= 1, "radiographer walkthrough returned nothing");
    const double elapsed = seconds_since(start);
    check.expect(elapsed < 120.0, "runtime " + fixed(elapsed) + " s");
    return check.finish("200 queries equal to the linear-scan oracle (" + std::to_string(hits) + " non-empty, " +
                        std::to_string(empty) + " empty); Dr. Akpan -> " + std::to_string(walkthrough) + "; " +
                        fixed(elapsed) + " s");
}

// ---- 5: image integrity ------------------------------------------------

Outcome criterion_images() {
    Checker check;
    ApiWorld w;
    auto c = w.client();
    const auto token = w.admin_token();
    w.patient("IMG-1");
    const auto xray = w.category("X-ray");
    const std::uint64_t max = storage::kDefaultMaxImageBytes;
    const double lo = std::log(1024.0), hi = std::log(static_cast<double>(max));

    Gen g(515);
    std::vector<std::pair<std::uint64_t, std::size_t>> plan;  // (content seed, size)
    for (std::size_t i = 0; i < 100; ++i) {
        std::size_t size = 1024;
        if (i == 1) {
            size = max;
        } else if (i > 1) {
            const double u = static_cast<double>(g.next() % 1'000'000) / 1'000'000.0;
            size = static_cast<std::size_t>(std::exp(lo + u * (hi - lo)));
            size = std::clamp<std::size_t>(size, 1024, max);
        }
        plan.emplace_back(g.next(), size);
    }

    std::vector<std::string> ids(plan.size());
    std::uint64_t total_bytes = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto bytes = random_bytes(plan[i].first, plan[i].second);
        total_bytes += bytes.size();
        UploadForm form{"IMG-1", xray};
        auto res = upload(c, token, form, bytes);
        if (!check.expect(res && res->status == 201,
                          "upload " + std::to_string(i) + " (" + std::to_string(bytes.size()) + " B) status " +
                              (res ? std::to_string(res->status) : "none"))) {
            continue;
        }
        const auto view = body_json(res);
        ids[i] = view.at("scan_id").get<std::string>();
        check.expect(view.at("scan_image").at("digest") == sha256_hex(bytes), "upload digest " + ids[i]);
    }
    std::size_t identical = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (ids[i].empty()) continue;
        const auto bytes = random_bytes(plan[i].first, plan[i].second);
        auto res = c.Get("/api/scans/" + ids[i] + "/image", bearer(token));
        if (!check.expect(res && res->status == 200, "fetch " + ids[i])) continue;
        const bool same = res->body == bytes && sha256_hex(res->body) == sha256_hex(bytes) &&
                          res->get_header_value("X-Content-SHA256") == sha256_hex(bytes);
        identical += same ? 1 : 0;
        check.expect(same, "fetched bytes differ for " + ids[i]);
    }

    // Same-length corruption of one stored blob.
    const auto victim = random_bytes(plan[0].first, plan[0].second);
    const auto digest = sha256_hex(victim);
    const auto blob = w.dir / ("data/blobs/" + digest.substr(0, 2) + "/" + digest);
    std::string stored = testing::slurp(blob);
    check.expect(stored.size() == victim.size(), "blob file size");
    if (!stored.empty()) stored[stored.size() / 2] = static_cast<char>(stored[stored.size() / 2] ^ 0x01);
    {
        std::ofstream out(blob, std::ios::binary | std::ios::trunc);
        out << stored;
    }
    auto tampered = c.Get("/api/scans/" + ids[0] + "/image", bearer(token));
    const bool refused = tampered && tampered->status == 500 &&
                         body_json(tampered).value("code", "") == "integrity_failure" &&
                         tampered->body.find(stored.substr(0, 64)) == std::string::npos;
    check.expect(refused, "tampered blob not refused with integrity_failure");
    return check.finish(std::to_string(identical) + "/100 byte-identical (1 KiB to " + std::to_string(max) +
                        " B, " + std::to_string(total_bytes / (1024 * 1024)) +
                        " MiB total); tamper -> 500 integrity_failure");
}

// ---- 6: audit completeness ----------------------------------------------

Outcome criterion_audit() {
    Checker check;
    ApiWorld w;
    auto c = w.client();
    const auto token = w.admin_token();
    const auto xray = w.category("X-ray");
    Gen g(606);

    // Setup, not counted: one patient with one scan and a role to edit.
    std::vector<std::string> passwords = {kAdminPassword};
    std::vector<std::string> patients, removable, categories, users, scans;
    patients.push_back(w.patient("AUD-0"));
    {
        auto res = upload(c, token, UploadForm{"AUD-0", xray}, "seed image");
        scans.push_back(body_json(res).at("scan_id").get<std::string>());
    }
    auto role_res = testing::send(c, "POST", "/api/roles", token,
                                  Json{{"role_name", "Ward"}, {"privileges", {"patients"}}}.dump());
    const auto role_id = body_json(role_res).at("role_id").get<std::string>();

    const auto baseline = w.audit_count();
    const auto first_new = w.audit().back().log_id;

    std::size_t mutating = 0, card = 1, naming = 0, user_seq = 0;
    std::map<std::string, std::size_t> by_kind;
    while (mutating < 500) {
        w.clock.advance(std::chrono::milliseconds(g.below(3) * 250));
        const auto choice = g.below(11);
        std::string kind;
        httplib::Result res;
        std::string new_patient, new_user, new_category;
        switch (choice) {
            case 0:
            case 1: {
                kind = "POST /api/patients";
                const auto card_no = "AUD-" + std::to_string(card++);
                res = testing::send(c, "POST", "/api/patients", token,
                                    Json{{"first_name", g.word(3, 8)}, {"last_name", g.word(3, 8)},
                                         {"card_number", card_no}}.dump());
                if (res && res->status == 201) new_patient = body_json(res).at("patient_id").get<std::string>();
                break;
            }
            case 2:
                kind = "PUT /api/patients/{id}";
                res = testing::send(c, "PUT", "/api/patients/" + patients[g.below(patients.size())], token,
                                    Json{{"address", g.text(5, 20)}}.dump());
                break;
            case 3:
                if (removable.empty()) continue;
                kind = "DELETE /api/patients/{id}";
                res = testing::send(c, "DELETE", "/api/patients/" + removable.back(), token);
                if (res && res->status == 200) removable.pop_back();
                break;
            case 4:
                kind = "POST /api/categories";
                res = testing::send(c, "POST", "/api/categories", token,
                                    Json{{"category_name", "Modality " + std::to_string(naming++)},
                                         {"category_description", g.text(3, 30)}}.dump());
                if (res && res->status == 201) new_category = body_json(res).at("category_id").get<std::string>();
                break;
            case 5:
                if (categories.empty()) continue;
                kind = "PUT /api/categories/{id}";
                {
                    const auto id = categories[g.below(categories.size())];
                    res = testing::send(c, "PUT", "/api/categories/" + id, token,
                                        Json{{"category_name", "Modality " + id},
                                             {"category_description", g.text(3, 30)}}.dump());
                }
                break;
            case 6: {
                kind = "POST /api/scans";
                UploadForm form{"AUD-0", xray};
                form.details = g.text(3, 30);
                res = upload(c, token, form, random_bytes(g.next(), 256 + g.below(2048)));
                if (res && res->status == 201) scans.push_back(body_json(res).at("scan_id").get<std::string>());
                break;
            }
            case 7: {
                kind = "POST /api/users";
                const auto id = "user" + std::to_string(user_seq++);
                const auto pw = "pw-" + g.word(10, 16);
                res = testing::send(c, "POST", "/api/users", token,
                                    Json{{"user_id", id}, {"password", pw}, {"first_name", g.word(3, 8)}}.dump());
                if (res && res->status == 201) {
                    new_user = id;
                    passwords.push_back(pw);
                }
                break;
            }
            case 8:
                if (users.empty()) continue;
                kind = "PUT /api/users/{id}";
                res = testing::send(c, "PUT", "/api/users/" + users[g.below(users.size())], token,
                                    Json{{"title", g.word(2, 4)}}.dump());
                break;
            case 9:
                kind = "PUT /api/roles/{id}";
                res = testing::send(c, "PUT", "/api/roles/" + role_id, token,
                                    Json{{"privileges", g.coin() ? Json{"patients"} : Json{"patients", "news"}}}.dump());
                break;
            default:
                if (users.empty()) continue;
                kind = "POST /api/roles/{id}/assign/{user_id}";
                res = testing::send(c, "POST", "/api/roles/" + role_id + "/assign/" + users[g.below(users.size())],
                                    token);
                break;
        }
        if (!check.expect(res && res->status >= 200 && res->status < 300,
                          kind + " status " + (res ? std::to_string(res->status) + " " + res->body : "none"))) {
            ++mutating;
            continue;
        }
        if (!new_patient.empty()) {
            (g.coin() ? patients : removable).push_back(new_patient);
        }
        if (!new_user.empty()) users.push_back(new_user);
        if (!new_category.empty()) categories.push_back(new_category);
        ++by_kind[kind];
        ++mutating;
        check.expect(w.audit_count() == baseline + mutating, kind + " did not add exactly one entry");
    }

    std::size_t views = 0;
    for (; views < 200; ++views) {
        w.clock.advance(std::chrono::milliseconds(g.below(2) * 100));
        auto res = c.Get("/api/scans/" + scans[g.below(scans.size())] + "/image", bearer(token));
        check.expect(res && res->status == 200, "image view failed");
    }

    const auto trail = w.audit();
    const auto added = trail.size() - baseline;
    check.expect(added == 700, "new audit entries " + std::to_string(added));
    for (std::size_t i = 1; i < trail.size(); ++i) {
        check.expect(trail[i].log_id > trail[i - 1].log_id, "log_id not increasing at " + std::to_string(i));
        check.expect(trail[i].event_timestamp >= trail[i - 1].event_timestamp,
                     "timestamp decreasing at " + std::to_string(i));
    }
    std::size_t mentions = 0;
    for (const auto& e : trail) {
        std::string lower = fold(e.event_description);
        bool bad = lower.find("pbkdf2") != std::string::npos;
        for (const auto& pw : passwords) bad = bad || e.event_description.find(pw) != std::string::npos;
        mentions += bad ? 1 : 0;
    }
    check.expect(mentions == 0, std::to_string(mentions) + " entries mention password text");
    std::size_t view_entries = 0;
    for (const auto& e : trail) {
        if (e.log_id > first_new && e.event_description.rfind("view image: ", 0) == 0) ++view_entries;
    }
    check.expect(view_entries == 200, "view entries " + std::to_string(view_entries));
    return check.finish("500 mutations over " + std::to_string(by_kind.size()) + " routes + 200 views -> " +
                        std::to_string(added) + " entries, ids and timestamps ordered, no password text");
}

// ---- 7: retention purge -------------------------------------------------

Outcome criterion_purge() {
    Checker check;
    ApiWorld w;
    auto c = w.client();
    const auto token = w.admin_token();
    w.patient("RET-1");
    const auto xray = w.category("X-ray");
    const auto now = w.clock.now();
    Gen g(707);

    struct Planned {
        std::string scan_id;
        std::optional<Timestamp> expiry;
    };
    std::vector<Planned> planned;
    for (std::size_t i = 0; i < 50; ++i) {
        UploadForm form{"RET-1", xray};
        form.scan_date = format_rfc3339(now - std::chrono::hours(24 * 1000) + std::chrono::minutes(g.below(1000)));
        std::optional<Timestamp> expiry;
        if (i < 2 || g.below(10) != 0) {
            // Up to a year either side of now, never within a minute of it.
            const auto magnitude = std::chrono::minutes(2 + g.below(365 * 24 * 60));
            const bool past = i == 0 || (i != 1 && g.coin());
            expiry = past ? now - magnitude : now + magnitude;
            form.expiry = format_rfc3339(*expiry);
        }
        auto res = upload(c, token, form, random_bytes(g.next(), 512));
        if (!check.expect(res && res->status == 201, "upload " + std::to_string(i))) continue;
        planned.push_back({body_json(res).at("scan_id").get<std::string>(), expiry});
    }

    std::set<std::string> want;
    for (const auto& p : planned) {
        if (p.expiry && *p.expiry < now) want.insert(p.scan_id);
    }
    const auto before = w.audit_count();
    auto res = testing::send(c, "POST", "/api/admin/purge-expired", token);
    if (!check.expect(res && res->status == 200, "purge status")) return check.finish("");
    std::set<std::string> got;
    const auto purged = body_json(res);
    for (const auto& id : purged.at("purged")) got.insert(id.get<std::string>());
    check.expect(got == want, "purged " + std::to_string(got.size()) + ", oracle " + std::to_string(want.size()));

    const auto trail = w.audit();
    std::multiset<std::string> described;
    for (std::size_t i = before; i < trail.size(); ++i) described.insert(trail[i].event_description);
    std::multiset<std::string> expected_descriptions;
    for (const auto& id : want) expected_descriptions.insert("purge scan: " + id);
    check.expect(trail.size() - before == want.size(), "purge audit entries " + std::to_string(trail.size() - before));
    check.expect(described == expected_descriptions, "purge audit descriptions");

    std::size_t kept = 0;
    for (const auto& p : planned) {
        auto meta = c.Get("/api/scans/" + p.scan_id, bearer(token));
        const int expected_status = want.count(p.scan_id) ? 404 : 200;
        check.expect(meta && meta->status == expected_status, p.scan_id + " after purge");
        kept += want.count(p.scan_id) ? 0 : 1;
    }
    return check.finish(std::to_string(want.size()) + " expired of " + std::to_string(planned.size()) +
                        " purged exactly, " + std::to_string(kept) + " kept, one audit entry each");
}

// ---- 8: performance -----------------------------------------------------

Outcome criterion_performance() {
    Checker check;
    auto& archive = seeded();
    if (!check.expect(archive.ok, archive.problem)) return check.finish("");
    ServedStore served(archive.data);
    const auto corpus = load_corpus(*served.store);
    auto c = served.client();
    c.set_keep_alive(true);
    const auto token = login(c, "admin", kAdminPassword);
    if (!check.expect(!token.empty(), "admin login")) return check.finish("");

    Gen g(8008);
    const std::vector<std::string> limits = {"10", "50", "200"};
    std::vector<double> ms;
    for (std::size_t i = 0; i < 410; ++i) {
        httplib::Params params;
        std::string path = "/api/scans/search";
        if (i % 9 == 8) {
            path = "/api/patients";
            params.emplace("term", g.word(1, 2));
        } else {
            const auto& by = kCriteria[i % kCriteria.size()];
            params.emplace("by", by);
            // Single letters are the widest matches.
            params.emplace("term", i % 5 == 0 ? g.word(1, 1) : random_term(g, corpus, by));
        }
        params.emplace("limit", limits[g.below(limits.size())]);
        const auto t0 = SteadyClock::now();
        auto res = c.Get(path, params, bearer(token));
        const bool ok = res && res->status == 200 && Json::parse(res->body).contains("items");
        const double elapsed = std::chrono::duration<double, std::milli>(SteadyClock::now() - t0).count();
        check.expect(ok, "query " + std::to_string(i) + " failed");
        if (i >= 10) ms.push_back(elapsed);  // connection warm-up excluded
    }
    std::sort(ms.begin(), ms.end());
    const double median = ms[ms.size() / 2];
    const double p99 = ms[static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(ms.size()))) - 1];
    check.expect(median < 100.0, "median " + fixed(median, 2) + " ms");
    check.expect(p99 < 500.0, "p99 " + fixed(p99, 2) + " ms");
    return check.finish(std::to_string(ms.size()) + " queries over 3000 scans: median " + fixed(median, 2) +
                        " ms, p99 " + fixed(p99, 2) + " ms, max " + fixed(ms.back(), 2) + " ms");
}

// ---- 9: durability ------------------------------------------------------

struct Snapshot {
    Json categories, users, patients, scans, audit;
    std::map<std::string, std::string> image_digests;
};

Snapshot take_snapshot(httplib::Client& c, const std::string& token) {
    Snapshot s;
    s.categories = Json::parse(c.Get("/api/categories", bearer(token))->body);
    s.users = Json::parse(c.Get("/api/users", bearer(token))->body);
    s.patients = all_pages(c, token, "/api/patients", {{"term", "dur-"}});
    s.scans = all_pages(c, token, "/api/scans/search", {{"by", "radiographer"}, {"term", "dr"}});
    for (const auto& scan : s.scans) {
        const auto id = scan.at("scan_id").get<std::string>();
        auto img = c.Get("/api/scans/" + id + "/image", bearer(token));
        s.image_digests[id] = img && img->status == 200 ? sha256_hex(img->body) : "missing";
    }
    s.audit = Json::parse(c.Get("/api/audit", bearer(token))->body);
    return s;
}

Outcome criterion_durability() {
    Checker check;
    TempDir t;
    const auto data = t / "data";
    auto init = testing::run({kBin, "init-admin", "--data-dir", data.string()},
                             {{"ARCHIVIST_ADMIN_PASSWORD", kAdminPassword}});
    if (!check.expect(init.exit_code == 0, "init-admin")) return check.finish("");
    const int port = testing::free_port();
    const std::map<std::string, std::string> env = {{"ARCHIVIST_DATA_DIR", data.string()},
                                                    {"ARCHIVIST_LISTEN_PORT", std::to_string(port)}};
    auto start_server = [&] {
        auto p = std::make_unique<Process>(std::vector<std::string>{kBin, "serve"}, env);
        return p->wait_for_output("listening on") ? std::move(p) : nullptr;
    };
    Gen g(909);

    // Phase 1: a mixed workload, then a reference snapshot.
    auto server = start_server();
    if (!check.expect(server != nullptr, "first serve did not start")) return check.finish("");
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    auto token = login(c, "admin", kAdminPassword);
    if (!check.expect(!token.empty(), "admin login")) return check.finish("");
    std::string category_id;
    for (int i = 0; i < 2; ++i) {
        auto res = testing::send(c, "POST", "/api/categories", token,
                                 Json{{"category_name", "Fluoroscopy " + std::to_string(i)}}.dump());
        check.expect(res && res->status == 201, "category create");
        if (res && res->status == 201) category_id = body_json(res).at("category_id").get<std::string>();
    }
    for (int i = 0; i < 20; ++i) {
        auto res = testing::send(c, "POST", "/api/patients", token,
                                 Json{{"first_name", g.word(3, 8)}, {"last_name", g.word(3, 8)},
                                      {"card_number", "DUR-" + std::to_string(i)}}.dump());
        check.expect(res && res->status == 201, "patient create");
    }
    for (int i = 0; i < 30; ++i) {
        UploadForm form{"DUR-" + std::to_string(g.below(20)), category_id};
        form.radiographer = "Dr. " + g.word(4, 8);
        auto res = upload(c, token, form, random_bytes(g.next(), 1024 + g.below(64 * 1024)));
        check.expect(res && res->status == 201, "scan upload");
    }
    for (int i = 0; i < 3; ++i) {
        auto res = testing::send(c, "POST", "/api/users", token,
                                 Json{{"user_id", "staff" + std::to_string(i)}, {"password", "staff-password-" +
                                                                                              std::to_string(i)}}.dump());
        check.expect(res && res->status == 201, "user create");
    }
    const auto reference = take_snapshot(c, token);
    check.expect(reference.scans.size() == 30 && reference.patients.size() == 20, "reference snapshot size");

    server->signal(SIGKILL);
    check.expect(server->wait(30s) == std::optional<int>(128 + SIGKILL), "server not killed");
    server.reset();

    // Restart on the same directory: the lock must be recoverable.
    server = start_server();
    if (!check.expect(server != nullptr, "restart after kill failed")) return check.finish("");
    token = login(c, "admin", kAdminPassword);
    if (!check.expect(!token.empty(), "login after restart")) return check.finish("");
    const auto after = take_snapshot(c, token);
    check.expect(after.categories == reference.categories, "categories differ after restart");
    check.expect(after.users == reference.users, "users differ after restart");
    check.expect(after.patients == reference.patients, "patients differ after restart");
    check.expect(after.scans == reference.scans, "scans differ after restart");
    check.expect(after.image_digests == reference.image_digests, "image digests differ after restart");
    const bool audit_prefix =
        after.audit.size() >= reference.audit.size() &&
        std::equal(reference.audit.begin(), reference.audit.end(), after.audit.begin());
    check.expect(audit_prefix, "audit trail before the kill not preserved");

    // Phase 2: kill in the middle of a stream of registrations.
    std::vector<std::string> committed;
    std::mutex committed_mutex;
    std::atomic<bool> done{false};
    std::thread writer([&] {
        httplib::Client wc("127.0.0.1", port);
        wc.set_read_timeout(10, 0);
        for (int i = 0; !done; ++i) {
            auto res = testing::send(wc, "POST", "/api/patients", token,
                                     Json{{"first_name", "Stream"}, {"last_name", "Writer"},
                                          {"card_number", "STR-" + std::to_string(i)}}.dump());
            if (!res) break;
            if (res->status == 201) {
                std::lock_guard lock(committed_mutex);
                committed.push_back(body_json(res).at("patient_id").get<std::string>());
            }
        }
    });
    const auto deadline = SteadyClock::now() + 60s;
    while (SteadyClock::now() < deadline) {
        {
            std::lock_guard lock(committed_mutex);
            if (committed.size() >= 40) break;
        }
        std::this_thread::sleep_for(5ms);
    }
    server->signal(SIGKILL);
    server->wait(30s);
    done = true;
    writer.join();
    server.reset();

    server = start_server();
    if (!check.expect(server != nullptr, "second restart failed")) return check.finish("");
    token = login(c, "admin", kAdminPassword);
    std::set<std::string> present;
    for (const auto& p : all_pages(c, token, "/api/patients", {{"term", "str-"}})) {
        present.insert(p.at("patient_id").get<std::string>());
    }
    std::size_t lost = 0;
    for (const auto& id : committed) lost += present.count(id) ? 0 : 1;
    check.expect(committed.size() >= 40, "stream committed only " + std::to_string(committed.size()));
    check.expect(lost == 0, std::to_string(lost) + " committed patients lost");
    const auto final_state = take_snapshot(c, token);
    check.expect(final_state.scans == reference.scans && final_state.categories == reference.categories,
                 "phase 1 state changed after second restart");

    server->signal(SIGTERM);
    check.expect(server->wait(30s) == std::optional<int>(0), "graceful stop");
    return check.finish("2 kills: reference snapshot equal after restart; " + std::to_string(committed.size()) +
                        " streamed commits, " + std::to_string(present.size() - committed.size()) +
                        " in flight, 0 lost");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"schema conformance", criterion_schema},
        {"RBAC matrix", criterion_rbac},
        {"login semantics", criterion_login},
        {"search oracle equivalence", criterion_search},
        {"image integrity round trip", criterion_images},
        {"audit completeness", criterion_audit},
        {"retention purge", criterion_purge},
        {"search performance", criterion_performance},
        {"durability", criterion_durability},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::stoul(argv[i])));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto number = i + 1;
        if (!only.empty() && !only.count(number)) continue;
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failed += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << number << " " << criteria[i].first << ": "
                  << outcome.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
