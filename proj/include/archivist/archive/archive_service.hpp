#pragma once

// Clinical workflows: patients, scan categories, scan upload and retrieval,
// retention purge. Each mutation is one storage transaction carrying its own
// audit entry.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archivist/domain/serialize.hpp"
#include "archivist/domain/types.hpp"
#include "archivist/storage/store.hpp"

namespace archivist {

inline constexpr std::string_view kAcceptedMediaTypes[] = {"image/png", "image/jpeg",
                                                           "application/octet-stream"};

// Lowercased type without parameters, or UnsupportedMediaType.
std::string normalize_media_type(std::string_view raw);

struct ScanUploadRequest {
    std::string card_number;
    CategoryId scan_category_id;
    std::string radiographer;
    std::string image_bytes;
    std::string image_media_type;
    Timestamp scan_date{};
    std::string scan_details;
    // Stored as ScanRecord::comments.
    std::string findings;
    std::optional<Timestamp> expiry;
};

struct ScanView {
    ScanRecord scan;
    std::string category_name;
    std::string patient_name;
    std::string card_number;

    bool operator==(const ScanView&) const = default;
};

void to_json(Json& j, const ScanView& view);

struct ScanImage {
    std::string bytes;
    std::string media_type;
    std::string digest;
};

// Newest scan_timestamp first, then ascending scan number.
bool newest_first(const ScanRecord& a, const ScanRecord& b);

ScanView make_scan_view(const storage::Reader& r, const ScanRecord& scan);

class ArchiveService {
public:
    explicit ArchiveService(storage::Store& store, Clock clock = system_clock());

    Timestamp now() const { return clock_(); }

    // Administrator holding Patients. Throws Forbidden, DuplicateCardNumber,
    // FieldErrors.
    PatientId register_patient(const UserAccount& actor, PatientRecord candidate);
    // changes is a partial patient object. Throws Forbidden, UnknownPatient,
    // DuplicateCardNumber, FieldErrors, BadRequest.
    PatientRecord update_patient(const UserAccount& actor, std::string_view patient_id,
                                 const Json& changes);
    // Throws Forbidden, UnknownPatient, HasDependents.
    void delete_patient(const UserAccount& actor, std::string_view patient_id);

    // Throws Forbidden, DuplicateCategory, FieldErrors.
    ScanCategory create_scan_category(const UserAccount& actor, std::string_view name,
                                      std::string_view description);
    // Throws Forbidden, UnknownCategory, DuplicateCategory, FieldErrors.
    ScanCategory update_scan_category(const UserAccount& actor, std::string_view category_id,
                                      std::string_view name, std::string_view description);
    // Any authenticated actor; sorted by name.
    std::vector<ScanCategory> list_scan_categories(const UserAccount& actor) const;

    // Throws Forbidden, UnknownPatientCard, UnknownCategory, BlobTooLarge,
    // UnsupportedMediaType, FieldErrors.
    ScanId upload_scan(const UserAccount& actor, const ScanUploadRequest& req);

    // Throws Forbidden, UnknownScan.
    ScanView get_scan(const UserAccount& actor, std::string_view scan_id) const;
    // Audited as "view image: <id>"; a denial is audited too. Throws
    // Forbidden, UnknownScan, IntegrityFailure.
    ScanImage get_scan_image(const UserAccount& actor, std::string_view scan_id);

    // Newest first. Throws Forbidden, UnknownPatient.
    std::vector<ScanView> list_scans_for_patient(const UserAccount& actor,
                                                 std::string_view patient_id) const;

    // Deletes scans whose expiry < now, then their blobs once nothing else
    // references them. Administrator holding ManageUsers.
    std::vector<ScanId> purge_expired_scans(const UserAccount& actor);
    std::vector<ScanId> purge_expired_scans(const UserAccount& actor, Timestamp now);

private:
    storage::Store& store_;
    Clock clock_;
};

}  // namespace archivist
