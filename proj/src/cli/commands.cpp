#include "archivist/cli/commands.hpp"

#include <array>
#include <cstdio>
#include <random>

#include "archivist/archive/archive_service.hpp"
#include "archivist/archive/bootstrap.hpp"
#include "archivist/auth/rbac.hpp"
#include "archivist/domain/serialize.hpp"

namespace archivist::cli {

namespace fs = std::filesystem;
using storage::EntityKind;

namespace {

constexpr std::array kFirstNames = {"Ada",    "Bisi",  "Chidi", "Dayo",   "Emeka", "Funmi", "Grace",
                                    "Hauwa",  "Ifeoma", "Jide", "Kemi",   "Lola",  "Musa",  "Ngozi",
                                    "Obi",    "Patience", "Rotimi", "Sade", "Tunde", "Uche",  "Yusuf",
                                    "Zainab", "Amaka", "Bola", "Femi",   "Halima", "Kunle", "Tobi"};
constexpr std::array kLastNames = {"Adeyemi", "Bello",   "Chukwu", "Danjuma", "Eze",     "Fashola",
                                   "Garba",   "Ibrahim", "Johnson", "Kalu",   "Lawal",   "Mohammed",
                                   "Nwosu",   "Obi",     "Okafor", "Olawale", "Onyeka",  "Sani",
                                   "Taiwo",   "Umeh",    "Usman",  "Williams", "Yakubu", "Ogunleye"};
constexpr std::array kStreets = {"Marina", "Allen Avenue", "Awolowo", "Herbert Macaulay", "Broad Street",
                                 "Adeola Odeku", "Ring Road", "Zik Avenue"};
constexpr std::array kCities = {"Lagos", "Ibadan", "Enugu", "Abuja", "Kano", "Port Harcourt", "Calabar"};
// "Dr. Akpan" first: every non-empty seed run has at least one of their scans.
constexpr std::array kRadiographers = {"Dr. Akpan", "Dr. Bello",   "Dr. Okafor", "Dr. Adeyemi",
                                       "Dr. Eze",   "Dr. Ibrahim", "Dr. Nwosu",  "Dr. Musa"};
constexpr std::array kCategories = {"X-ray", "CT scan", "Mammography"};
constexpr std::array kDetails = {"chest PA",           "left wrist AP and lateral", "head without contrast",
                                 "bilateral CC and MLO", "abdomen with contrast",   "lumbar spine lateral",
                                 "right knee AP",       "pelvis AP",                 "cervical spine",
                                 "thorax with contrast"};
constexpr std::array kFindings = {"no acute findings",
                                  "hairline fracture of the distal radius",
                                  "small nodule, follow-up in six months",
                                  "mild degenerative change",
                                  "clear lung fields",
                                  "benign-appearing calcifications",
                                  "soft tissue swelling only",
                                  "compare with prior study"};

class Picker {
public:
    explicit Picker(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }

    template <typename A>
    std::string pick(const A& items) {
        return items[below(items.size())];
    }

    std::string digits(std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>('0' + below(10)));
        return out;
    }

private:
    std::mt19937_64 rng_;
};

std::string card_for(std::uint64_t seed, std::uint64_t i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "D%llu-%06llu", static_cast<unsigned long long>(seed),
                  static_cast<unsigned long long>(i + 1));
    return buf;
}

std::string lower(std::string s) {
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

// 8x8 greyscale binary PGM.
std::string tiny_image(Picker& p) {
    std::string out = "P5\n8 8\n255\n";
    for (int i = 0; i < 64; ++i) out.push_back(static_cast<char>(p.below(256)));
    return out;
}

UserAccount first_administrator(const storage::Store& store) {
    return store.read([](const storage::Reader& r) {
        std::optional<UserAccount> found;
        r.for_each(EntityKind::UserAccount, [&](const Json& j) {
            if (found) return;
            auto u = decode<UserAccount>(j);
            if (u.account_status == AccountStatus::Active && auth::is_administrator(r, u)) found = std::move(u);
        });
        if (!found) throw Error(ErrorCode::StoreNotInitialized, "store has no active administrator");
        return *found;
    });
}

}  // namespace

int exit_code_for(const Error& e) noexcept {
    switch (e.code()) {
        case ErrorCode::AlreadyInitialized: return kExitAlreadyInitialized;
        case ErrorCode::WeakPassword: return kExitWeakPassword;
        case ErrorCode::StoreNotInitialized: return kExitStoreNotInitialized;
        case ErrorCode::IoFailure: return kExitIoFailure;
        default: return kExitFailure;
    }
}

std::unique_ptr<storage::Store> open_initialized(const fs::path& data_dir, storage::StoreOptions options) {
    std::error_code ec;
    if (!fs::exists(data_dir / "manifest", ec)) {
        throw Error(ErrorCode::StoreNotInitialized, "no archive store in the data directory; run init-admin first");
    }
    options.create_if_missing = false;
    auto store = storage::Store::open(data_dir, options);
    if (!store->read([](const storage::Reader& r) { return is_initialized(r); })) {
        throw Error(ErrorCode::StoreNotInitialized, "archive store has no accounts; run init-admin first");
    }
    return store;
}

SeedSummary seed_demo(storage::Store& store, const SeedOptions& options) {
    SeedSummary summary;
    if (options.scans > 0 && options.patients == 0) {
        throw Error(ErrorCode::BadRequest, "scans need at least one patient");
    }
    const bool present = store.read([&](const storage::Reader& r) {
        return r.find_unique(EntityKind::Patient, "card_number", card_for(options.seed, 0)).has_value();
    });
    if (present) {
        summary.already_present = true;
        return summary;
    }

    const auto actor = first_administrator(store);
    ArchiveService archive(store);
    Picker p(options.seed);

    std::vector<std::string> cards;
    cards.reserve(options.patients);
    for (std::uint64_t i = 0; i < options.patients; ++i) {
        PatientRecord rec;
        rec.first_name = p.pick(kFirstNames);
        rec.last_name = p.pick(kLastNames);
        // One draw per statement keeps the sequence independent of operand
        // evaluation order.
        const auto number = 1 + p.below(200);
        const auto street = p.pick(kStreets);
        rec.address = std::to_string(number) + " " + street + ", " + p.pick(kCities);
        rec.phone = "+234" + p.digits(10);
        rec.email = lower(rec.first_name + "." + rec.last_name) + std::to_string(i + 1) + "@example.org";
        rec.sex = std::array{Sex::Female, Sex::Male, Sex::Unspecified}[p.below(3)];
        rec.card_number = card_for(options.seed, i);
        archive.register_patient(actor, rec);
        cards.push_back(rec.card_number);
        ++summary.patients;
    }

    std::vector<CategoryId> categories;
    store.read([&](const storage::Reader& r) {
        for (const char* name : kCategories) {
            auto row = r.find_unique(EntityKind::ScanCategory, "category_name", name);
            if (!row) throw Error(ErrorCode::UnknownCategory, std::string("seed category missing: ") + name);
            categories.push_back(row->at("category_id").get<std::string>());
        }
    });

    const Timestamp base = *parse_rfc3339("2024-01-01T00:00:00Z");
    for (std::uint64_t i = 0; i < options.scans; ++i) {
        ScanUploadRequest req;
        req.card_number = cards[p.below(cards.size())];
        req.scan_category_id = categories[p.below(categories.size())];
        req.radiographer = i == 0 ? std::string(kRadiographers[0]) : p.pick(kRadiographers);
        req.image_bytes = tiny_image(p);
        req.image_media_type = "application/octet-stream";
        req.scan_date = base + std::chrono::minutes(p.below(2 * 365 * 24 * 60));
        req.scan_details = p.pick(kDetails);
        req.findings = p.pick(kFindings);
        if (p.below(10) < 3) req.expiry = req.scan_date + std::chrono::hours(24 * 180 * (1 + p.below(12)));
        archive.upload_scan(actor, req);
        ++summary.scans;
    }
    return summary;
}

std::size_t export_audit(const storage::Store& store, const auth::AuditFilter& filter, std::ostream& out) {
    const auto entries = store.read([&](const storage::Reader& r) { return auth::read_audit(r, filter); });
    for (const auto& e : entries) out << Json(e).dump() << '\n';
    return entries.size();
}

}  // namespace archivist::cli
