#pragma once

// Patient and scan search: case-insensitive substring containment on
// normalized text, paged.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archivist/archive/archive_service.hpp"
#include "archivist/domain/types.hpp"
#include "archivist/storage/store.hpp"

namespace archivist::search {

enum class ScanCriterion {
    ScanDetails,
    Radiographer,
    PatientName,
    PatientCardNumber,
    PatientLastName,
    PatientFirstName,
    PatientEmail,
    PatientPhone,
};

inline constexpr ScanCriterion kAllCriteria[] = {
    ScanCriterion::ScanDetails,       ScanCriterion::Radiographer,     ScanCriterion::PatientName,
    ScanCriterion::PatientCardNumber, ScanCriterion::PatientLastName,  ScanCriterion::PatientFirstName,
    ScanCriterion::PatientEmail,      ScanCriterion::PatientPhone,
};

// scan_details, radiographer, patient_name, card_number, last_name,
// first_name, email, phone.
std::string_view wire_name(ScanCriterion c) noexcept;
std::optional<ScanCriterion> parse_criterion(std::string_view wire) noexcept;

inline constexpr std::size_t kMaxPageSize = 200;

// Trim, ASCII case fold, collapse whitespace runs to one space.
std::string normalize_text(std::string_view raw);
// normalize_text, but throws EmptyTerm when nothing is left.
std::string normalize_term(std::string_view raw);

// Throws BadPaging unless 1 <= limit <= kMaxPageSize.
void check_paging(std::size_t offset, std::size_t limit);

template <typename T>
struct Page {
    std::vector<T> items;
    std::size_t total_matches = 0;
    std::size_t offset = 0;
    std::size_t limit = 0;
};

// Matches on first_name, last_name, card_number, email or phone; ordered by
// (last_name, first_name, patient number).
std::vector<PatientRecord> match_patients(const storage::Reader& r, std::string_view term);
// Newest first.
std::vector<ScanView> match_scans(const storage::Reader& r, ScanCriterion criterion,
                                  std::string_view term);

class SearchService {
public:
    explicit SearchService(storage::Store& store) : store_(store) {}

    // Throws Forbidden (Patients), EmptyTerm, BadPaging.
    Page<PatientRecord> search_patients(const UserAccount& actor, std::string_view term,
                                        std::size_t offset, std::size_t limit) const;
    // Throws Forbidden (PatientImages), EmptyTerm, BadPaging.
    Page<ScanView> search_scans(const UserAccount& actor, ScanCriterion criterion,
                                std::string_view term, std::size_t offset, std::size_t limit) const;

private:
    storage::Store& store_;
};

}  // namespace archivist::search
