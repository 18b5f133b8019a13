#include "archivist/archive/archive_service.hpp"

#include <algorithm>
#include <set>

#include "archivist/auth/audit.hpp"
#include "archivist/auth/rbac.hpp"
#include "archivist/domain/validate.hpp"
#include "archivist/error.hpp"

namespace archivist {

using auth::PrivilegeName;
using storage::EntityKind;
using storage::Predicate;
using storage::Transaction;

namespace {

Error unknown_patient(std::string_view id) {
    return Error(ErrorCode::UnknownPatient, "no patient " + std::string(id), "patient_id");
}

Error unknown_category(std::string_view id) {
    return Error(ErrorCode::UnknownCategory, "no scan category " + std::string(id), "scan_category_id");
}

Error unknown_scan(std::string_view id) {
    return Error(ErrorCode::UnknownScan, "no scan " + std::string(id), "scan_id");
}

Error duplicate_card() {
    return Error(ErrorCode::DuplicateCardNumber, "card number already registered", "card_number");
}

Error duplicate_category() {
    return Error(ErrorCode::DuplicateCategory, "scan category name already exists", "category_name");
}

Error field_error(std::string field, std::string message) {
    return Error(ErrorCode::FieldErrors, std::move(message),
                 std::vector<FieldError>{{std::move(field), ErrorCode::FieldErrors}});
}

// Saves, translating the storage uniqueness error into the domain one.
std::string save_patient(Transaction& tx, const PatientRecord& p) {
    if (auto other = tx.find_unique(EntityKind::Patient, "card_number", p.card_number);
        other && other->at("patient_id") != p.patient_id) {
        throw duplicate_card();
    }
    return tx.save(EntityKind::Patient, Json(p));
}

std::string save_category(Transaction& tx, const ScanCategory& c) {
    if (auto other = tx.find_unique(EntityKind::ScanCategory, "category_name", c.category_name);
        other && other->at("category_id") != c.category_id) {
        throw duplicate_category();
    }
    return tx.save(EntityKind::ScanCategory, Json(c));
}

std::string checked_category_name(std::string_view raw) {
    std::string name = trim(raw);
    if (name.empty()) throw field_error("category_name", "category name is required");
    return name;
}

std::uint64_t scan_number(const ScanId& id) {
    std::uint64_t n = 0;
    for (char c : id) {
        if (c >= '0' && c <= '9') n = n * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return n;
}

bool blob_referenced(const storage::Reader& r, const std::string& digest) {
    bool found = false;
    auto check = [&](const Json& j, const char* field) {
        const Json& ref = j.at(field);
        if (!ref.is_null() && ref.at("digest") == digest) found = true;
    };
    r.for_each(EntityKind::Scan, [&](const Json& j) { check(j, "scan_image"); });
    r.for_each(EntityKind::Patient, [&](const Json& j) { check(j, "photo"); });
    r.for_each(EntityKind::UserAccount, [&](const Json& j) { check(j, "photo"); });
    return found;
}

}  // namespace

std::string normalize_media_type(std::string_view raw) {
    std::string t = storage::fold_ascii(trim(raw.substr(0, raw.find(';'))));
    for (auto accepted : kAcceptedMediaTypes) {
        if (t == accepted) return t;
    }
    throw Error(ErrorCode::UnsupportedMediaType,
                "unsupported media type; expected image/png, image/jpeg or application/octet-stream",
                "image_media_type");
}

void to_json(Json& j, const ScanView& view) {
    j = Json(view.scan);
    j["category_name"] = view.category_name;
    j["patient_name"] = view.patient_name;
    j["card_number"] = view.card_number;
}

bool newest_first(const ScanRecord& a, const ScanRecord& b) {
    if (a.scan_timestamp != b.scan_timestamp) return a.scan_timestamp > b.scan_timestamp;
    return scan_number(a.scan_id) < scan_number(b.scan_id);
}

ScanView make_scan_view(const storage::Reader& r, const ScanRecord& scan) {
    ScanView v{scan, "", "", ""};
    if (auto c = r.get<ScanCategory>(EntityKind::ScanCategory, scan.scan_category_id)) {
        v.category_name = c->category_name;
    }
    if (auto p = r.get<PatientRecord>(EntityKind::Patient, scan.patient_id)) {
        v.patient_name = p->first_name + " " + p->last_name;
        v.card_number = p->card_number;
    }
    return v;
}

ArchiveService::ArchiveService(storage::Store& store, Clock clock)
    : store_(store), clock_(std::move(clock)) {}

PatientId ArchiveService::register_patient(const UserAccount& actor, PatientRecord candidate) {
    const Timestamp now = clock_();
    candidate.patient_id.clear();
    return store_.transact([&](Transaction& tx) {
        auth::require_administrator(tx, actor.user_id, PrivilegeName::Patients);
        auto p = validate_patient_record(std::move(candidate));
        const auto id = save_patient(tx, p);
        auth::append_audit(tx, actor.user_id, "register patient: " + p.card_number, now);
        return id;
    });
}

PatientRecord ArchiveService::update_patient(const UserAccount& actor, std::string_view patient_id,
                                             const Json& changes) {
    if (!changes.is_object()) throw Error(ErrorCode::BadRequest, "changes must be a JSON object");
    const Timestamp now = clock_();
    return store_.transact([&](Transaction& tx) {
        auth::require_administrator(tx, actor.user_id, PrivilegeName::Patients);
        auto current = tx.load(EntityKind::Patient, patient_id);
        if (!current) throw unknown_patient(patient_id);
        Json merged = *current;
        for (const auto& [key, value] : changes.items()) {
            if (key == "patient_id") {
                if (value != merged.at("patient_id")) {
                    throw Error(ErrorCode::BadRequest, "patient_id cannot be changed", "patient_id");
                }
                continue;
            }
            if (!merged.contains(key)) throw Error(ErrorCode::BadRequest, "unknown field " + key, key);
            merged[key] = value;
        }
        auto p = validate_patient_record(decode<PatientRecord>(merged));
        save_patient(tx, p);
        auth::append_audit(tx, actor.user_id, "update patient: " + p.patient_id, now);
        return p;
    });
}

void ArchiveService::delete_patient(const UserAccount& actor, std::string_view patient_id) {
    const Timestamp now = clock_();
    store_.transact([&](Transaction& tx) {
        auth::require_administrator(tx, actor.user_id, PrivilegeName::Patients);
        if (!tx.remove(EntityKind::Patient, patient_id)) throw unknown_patient(patient_id);
        auth::append_audit(tx, actor.user_id, "delete patient: " + std::string(patient_id), now);
    });
}

ScanCategory ArchiveService::create_scan_category(const UserAccount& actor, std::string_view name,
                                                  std::string_view description) {
    const Timestamp now = clock_();
    return store_.transact([&](Transaction& tx) {
        auth::require(tx, actor.user_id, PrivilegeName::PatientImages);
        ScanCategory c{"", checked_category_name(name), trim(description)};
        c.category_id = save_category(tx, c);
        auth::append_audit(tx, actor.user_id, "create category: " + c.category_id, now);
        return c;
    });
}

ScanCategory ArchiveService::update_scan_category(const UserAccount& actor,
                                                  std::string_view category_id,
                                                  std::string_view name,
                                                  std::string_view description) {
    const Timestamp now = clock_();
    return store_.transact([&](Transaction& tx) {
        auth::require(tx, actor.user_id, PrivilegeName::PatientImages);
        auto c = tx.get<ScanCategory>(EntityKind::ScanCategory, category_id);
        if (!c) throw unknown_category(category_id);
        c->category_name = checked_category_name(name);
        c->category_description = trim(description);
        save_category(tx, *c);
        auth::append_audit(tx, actor.user_id, "update category: " + c->category_id, now);
        return *c;
    });
}

std::vector<ScanCategory> ArchiveService::list_scan_categories(const UserAccount& actor) const {
    return store_.read([&](const storage::Reader& r) {
        auto user = r.get<UserAccount>(EntityKind::UserAccount, actor.user_id);
        if (!user || user->account_status != AccountStatus::Active) {
            throw Error(ErrorCode::InvalidSession, "invalid or expired session");
        }
        auto out = r.all<ScanCategory>(EntityKind::ScanCategory);
        std::sort(out.begin(), out.end(), [](const ScanCategory& a, const ScanCategory& b) {
            const auto fa = storage::fold_ascii(a.category_name);
            const auto fb = storage::fold_ascii(b.category_name);
            return fa != fb ? fa < fb : a.category_id < b.category_id;
        });
        return out;
    });
}

ScanId ArchiveService::upload_scan(const UserAccount& actor, const ScanUploadRequest& req) {
    const Timestamp now = clock_();
    const std::string media_type = normalize_media_type(req.image_media_type);

    auto resolve = [&](const storage::Reader& r) {
        auth::require(r, actor.user_id, PrivilegeName::PatientImages);
        auto patient = r.find_unique(EntityKind::Patient, "card_number", trim(req.card_number));
        if (!patient) {
            throw Error(ErrorCode::UnknownPatientCard, "card number is not registered", "card_number");
        }
        if (!r.contains(EntityKind::ScanCategory, req.scan_category_id)) {
            throw unknown_category(req.scan_category_id);
        }
        return patient->at("patient_id").get<std::string>();
    };

    // Everything checkable before the blob write is checked first, so a
    // rejected upload leaves nothing behind.
    store_.read(resolve);
    if (req.image_bytes.empty()) throw field_error("image", "image is empty");
    if (req.expiry && *req.expiry <= req.scan_date) {
        throw field_error("expiry", "expiry must be after the scan date");
    }
    ScanRecord scan;
    scan.scan_category_id = req.scan_category_id;
    scan.radiographer = trim(req.radiographer);
    scan.scan_timestamp = req.scan_date;
    scan.expiry = req.expiry;
    scan.scan_details = req.scan_details;
    scan.comments = req.findings;
    scan.scan_image = store_.put_blob(req.image_bytes, media_type);

    return store_.transact([&](Transaction& tx) {
        scan.patient_id = resolve(tx);
        scan.scan_id = tx.save(EntityKind::Scan, Json(scan));
        auth::append_audit(tx, actor.user_id, "upload scan: " + scan.scan_id, now);
        return scan.scan_id;
    });
}

ScanView ArchiveService::get_scan(const UserAccount& actor, std::string_view scan_id) const {
    return store_.read([&](const storage::Reader& r) {
        auth::require(r, actor.user_id, PrivilegeName::PatientImages);
        auto scan = r.get<ScanRecord>(EntityKind::Scan, scan_id);
        if (!scan) throw unknown_scan(scan_id);
        return make_scan_view(r, *scan);
    });
}

ScanImage ArchiveService::get_scan_image(const UserAccount& actor, std::string_view scan_id) {
    const Timestamp now = clock_();
    std::optional<ScanRecord> scan;
    try {
        scan = store_.read([&](const storage::Reader& r) {
            auth::require(r, actor.user_id, PrivilegeName::PatientImages);
            return r.get<ScanRecord>(EntityKind::Scan, scan_id);
        });
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Forbidden) {
            store_.transact([&](Transaction& tx) {
                auth::append_audit(tx, actor.user_id, "denied image access: " + std::string(scan_id), now);
            });
        }
        throw;
    }
    if (!scan) throw unknown_scan(scan_id);
    ScanImage out{store_.get_blob(scan->scan_image), scan->scan_image.media_type, scan->scan_image.digest};
    store_.transact([&](Transaction& tx) {
        auth::append_audit(tx, actor.user_id, "view image: " + scan->scan_id, now);
    });
    return out;
}

std::vector<ScanView> ArchiveService::list_scans_for_patient(const UserAccount& actor,
                                                             std::string_view patient_id) const {
    return store_.read([&](const storage::Reader& r) {
        auth::require(r, actor.user_id, PrivilegeName::PatientImages);
        if (!r.contains(EntityKind::Patient, patient_id)) throw unknown_patient(patient_id);
        auto scans = r.all<ScanRecord>(EntityKind::Scan,
                                       Predicate::equals("patient_id", std::string(patient_id)));
        std::sort(scans.begin(), scans.end(), newest_first);
        std::vector<ScanView> out;
        out.reserve(scans.size());
        for (const auto& s : scans) out.push_back(make_scan_view(r, s));
        return out;
    });
}

std::vector<ScanId> ArchiveService::purge_expired_scans(const UserAccount& actor) {
    return purge_expired_scans(actor, clock_());
}

std::vector<ScanId> ArchiveService::purge_expired_scans(const UserAccount& actor, Timestamp now) {
    std::set<std::string> digests;
    auto purged = store_.transact([&](Transaction& tx) {
        auth::require_administrator(tx, actor.user_id, PrivilegeName::ManageUsers);
        std::vector<ScanRecord> expired;
        tx.for_each(EntityKind::Scan, [&](const Json& j) {
            auto s = decode<ScanRecord>(j);
            if (s.expiry && *s.expiry < now) expired.push_back(std::move(s));
        });
        std::vector<ScanId> ids;
        for (const auto& s : expired) {
            tx.remove(EntityKind::Scan, s.scan_id);
            auth::append_audit(tx, actor.user_id, "purge scan: " + s.scan_id, now);
            digests.insert(s.scan_image.digest);
            ids.push_back(s.scan_id);
        }
        // A run that purges nothing still leaves a trace.
        if (ids.empty()) auth::append_audit(tx, actor.user_id, "purge scans: none expired", now);
        return ids;
    });
    // A blob left behind here is merely unreferenced.
    for (const auto& d : digests) {
        const bool referenced =
            store_.read([&](const storage::Reader& r) { return blob_referenced(r, d); });
        if (!referenced) store_.remove_blob(d);
    }
    return purged;
}

}  // namespace archivist
