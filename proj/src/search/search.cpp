#include "archivist/search/search.hpp"

#include <algorithm>
#include <unordered_map>

#include "archivist/auth/rbac.hpp"
#include "archivist/error.hpp"

namespace archivist::search {

using auth::PrivilegeName;
using storage::EntityKind;

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool contains(std::string_view field, const std::string& term) {
    return normalize_text(field).find(term) != std::string::npos;
}

std::uint64_t id_number(std::string_view id) {
    std::uint64_t n = 0;
    for (char c : id) {
        if (c >= '0' && c <= '9') n = n * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return n;
}

template <typename T>
Page<T> slice(std::vector<T> all, std::size_t offset, std::size_t limit) {
    Page<T> page;
    page.total_matches = all.size();
    page.offset = offset;
    page.limit = limit;
    if (offset < all.size()) {
        const auto end = std::min(all.size(), offset + limit);
        page.items.assign(std::make_move_iterator(all.begin() + static_cast<long>(offset)),
                          std::make_move_iterator(all.begin() + static_cast<long>(end)));
    }
    return page;
}

}  // namespace

std::string_view wire_name(ScanCriterion c) noexcept {
    switch (c) {
        case ScanCriterion::ScanDetails: return "scan_details";
        case ScanCriterion::Radiographer: return "radiographer";
        case ScanCriterion::PatientName: return "patient_name";
        case ScanCriterion::PatientCardNumber: return "card_number";
        case ScanCriterion::PatientLastName: return "last_name";
        case ScanCriterion::PatientFirstName: return "first_name";
        case ScanCriterion::PatientEmail: return "email";
        case ScanCriterion::PatientPhone: return "phone";
    }
    return "";
}

std::optional<ScanCriterion> parse_criterion(std::string_view wire) noexcept {
    for (ScanCriterion c : kAllCriteria) {
        if (wire_name(c) == wire) return c;
    }
    return std::nullopt;
}

std::string normalize_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
    return out;
}

std::string normalize_term(std::string_view raw) {
    auto t = normalize_text(raw);
    if (t.empty()) throw Error(ErrorCode::EmptyTerm, "search term is empty", "term");
    return t;
}

void check_paging(std::size_t /*offset*/, std::size_t limit) {
    if (limit < 1 || limit > kMaxPageSize) {
        throw Error(ErrorCode::BadPaging, "limit must be between 1 and 200", "limit");
    }
}

std::vector<PatientRecord> match_patients(const storage::Reader& r, std::string_view raw_term) {
    const std::string term = normalize_term(raw_term);
    std::vector<PatientRecord> out;
    r.for_each(EntityKind::Patient, [&](const Json& j) {
        auto p = decode<PatientRecord>(j);
        if (contains(p.first_name, term) || contains(p.last_name, term) ||
            contains(p.card_number, term) || contains(p.email, term) || contains(p.phone, term)) {
            out.push_back(std::move(p));
        }
    });
    std::sort(out.begin(), out.end(), [](const PatientRecord& a, const PatientRecord& b) {
        if (a.last_name != b.last_name) return a.last_name < b.last_name;
        if (a.first_name != b.first_name) return a.first_name < b.first_name;
        return id_number(a.patient_id) < id_number(b.patient_id);
    });
    return out;
}

std::vector<ScanView> match_scans(const storage::Reader& r, ScanCriterion criterion,
                                  std::string_view raw_term) {
    const std::string term = normalize_term(raw_term);

    std::unordered_map<std::string, PatientRecord> patients;
    std::unordered_map<std::string, std::string> categories;
    r.for_each(EntityKind::Patient, [&](const Json& j) {
        auto p = decode<PatientRecord>(j);
        patients.emplace(p.patient_id, std::move(p));
    });
    r.for_each(EntityKind::ScanCategory, [&](const Json& j) {
        categories.emplace(j.at("category_id").get<std::string>(), j.at("category_name").get<std::string>());
    });

    std::vector<ScanView> out;
    r.for_each(EntityKind::Scan, [&](const Json& j) {
        auto scan = decode<ScanRecord>(j);
        const auto p_it = patients.find(scan.patient_id);
        if (p_it == patients.end()) return;
        const PatientRecord& p = p_it->second;
        bool hit = false;
        switch (criterion) {
            case ScanCriterion::ScanDetails:
                hit = contains(scan.scan_details, term) || contains(scan.comments, term);
                break;
            case ScanCriterion::Radiographer: hit = contains(scan.radiographer, term); break;
            case ScanCriterion::PatientName:
                hit = contains(p.first_name, term) || contains(p.last_name, term);
                break;
            case ScanCriterion::PatientCardNumber: hit = contains(p.card_number, term); break;
            case ScanCriterion::PatientLastName: hit = contains(p.last_name, term); break;
            case ScanCriterion::PatientFirstName: hit = contains(p.first_name, term); break;
            case ScanCriterion::PatientEmail: hit = contains(p.email, term); break;
            case ScanCriterion::PatientPhone: hit = contains(p.phone, term); break;
        }
        if (!hit) return;
        ScanView v{std::move(scan), "", p.first_name + " " + p.last_name, p.card_number};
        if (auto c = categories.find(v.scan.scan_category_id); c != categories.end()) {
            v.category_name = c->second;
        }
        out.push_back(std::move(v));
    });
    std::sort(out.begin(), out.end(),
              [](const ScanView& a, const ScanView& b) { return newest_first(a.scan, b.scan); });
    return out;
}

Page<PatientRecord> SearchService::search_patients(const UserAccount& actor, std::string_view term,
                                                   std::size_t offset, std::size_t limit) const {
    check_paging(offset, limit);
    normalize_term(term);
    return store_.read([&](const storage::Reader& r) {
        auth::require(r, actor.user_id, PrivilegeName::Patients);
        return slice(match_patients(r, term), offset, limit);
    });
}

Page<ScanView> SearchService::search_scans(const UserAccount& actor, ScanCriterion criterion,
                                           std::string_view term, std::size_t offset,
                                           std::size_t limit) const {
    check_paging(offset, limit);
    normalize_term(term);
    return store_.read([&](const storage::Reader& r) {
        auth::require(r, actor.user_id, PrivilegeName::PatientImages);
        return slice(match_scans(r, criterion, term), offset, limit);
    });
}

}  // namespace archivist::search
