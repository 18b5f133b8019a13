#include "archivist/storage/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "archivist/crypto.hpp"
#include "archivist/domain/validate.hpp"
#include "archivist/error.hpp"
#include "fs_util.hpp"

namespace archivist::storage {

namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

fs::path entities_dir(const fs::path& root) { return root / "entities"; }
fs::path wal_path(const fs::path& root) { return entities_dir(root) / "wal.log"; }
fs::path snapshot_path(const fs::path& root, EntityKind kind) {
    return entities_dir(root) / std::string(kind_name(kind)) / "snapshot.jsonl";
}

std::string value_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

// Key text for one unique constraint, or nullopt when any part is null.
std::optional<std::string> unique_key_text(const UniqueKey& key, const Json& record) {
    std::string out;
    for (std::size_t i = 0; i < key.fields.size(); ++i) {
        auto it = record.find(key.fields[i]);
        if (it == record.end() || it->is_null()) return std::nullopt;
        if (i > 0) out.push_back('\x1f');
        out += value_text(*it);
    }
    return key.case_insensitive ? fold_ascii(out) : out;
}

std::string join_fields(const UniqueKey& key) {
    std::string out;
    for (std::size_t i = 0; i < key.fields.size(); ++i) {
        if (i > 0) out += ",";
        out += key.fields[i];
    }
    return out;
}

std::optional<std::uint64_t> numeric_suffix(const KindSchema& s, std::string_view id) {
    if (s.caller_assigned_id) return std::nullopt;
    if (!s.integer_id) {
        if (id.substr(0, s.id_prefix.size()) != s.id_prefix) return std::nullopt;
        id.remove_prefix(s.id_prefix.size());
    }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
    if (ec != std::errc{} || p != id.data() + id.size() || id.empty()) return std::nullopt;
    return v;
}

std::string read_whole_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read store file");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

[[noreturn]] void corrupt(std::string what) {
    throw Error(ErrorCode::CorruptStore, "corrupt store: " + what);
}

void non_empty(const std::string& value, std::string_view field) {
    if (trim(value).empty()) {
        throw Error(ErrorCode::FieldErrors, std::string(field) + " must not be empty",
                    std::vector<FieldError>{{std::string(field), ErrorCode::FieldErrors}});
    }
}

}  // namespace

void validate_record(EntityKind kind, const Json& record) {
    const KindSchema& s = schema(kind);
    if (!record.is_object()) {
        throw Error(ErrorCode::BadRequest, "record must be a JSON object");
    }
    for (const auto& [key, _] : record.items()) {
        if (std::find(s.fields.begin(), s.fields.end(), key) == s.fields.end()) {
            throw Error(ErrorCode::UnknownField,
                        "unknown field '" + key + "' for " + std::string(s.name), key);
        }
    }
    for (auto field : s.fields) {
        if (!record.contains(field)) {
            throw Error(ErrorCode::BadRequest, "field '" + std::string(field) + "' is missing",
                        std::string(field));
        }
    }

    switch (kind) {
        case EntityKind::Patient:
            validate_patient_record(decode<PatientRecord>(record));
            break;
        case EntityKind::Scan:
            validate_scan_record(decode<ScanRecord>(record));
            break;
        case EntityKind::ScanCategory:
            non_empty(decode<ScanCategory>(record).category_name, "category_name");
            break;
        case EntityKind::UserAccount: {
            auto user = decode<UserAccount>(record);
            validate_user_account(user);
            non_empty(user.password_digest, "password_digest");
            break;
        }
        case EntityKind::Role:
            non_empty(decode<Role>(record).role_name, "role_name");
            break;
        case EntityKind::Privilege:
            non_empty(decode<Privilege>(record).privilege_description, "privilege_description");
            break;
        case EntityKind::RolePrivilege:
            decode<RolePrivilege>(record);
            break;
        case EntityKind::AuditEntry:
            if (decode<AuditEntry>(record).event_description.empty()) {
                throw Error(ErrorCode::EmptyDescription, "audit event description is empty");
            }
            break;
    }
}

// ---------------------------------------------------------------- Reader

std::vector<Json> Reader::query(EntityKind kind, const Predicate& predicate) const {
    predicate.check(kind);
    std::vector<Json> out;
    for_each(kind, [&](const Json& j) {
        if (predicate.matches(j)) out.push_back(j);
    });
    return out;
}

std::size_t Reader::count(EntityKind kind) const {
    std::size_t n = 0;
    for_each(kind, [&](const Json&) { ++n; });
    return n;
}

namespace {

// Index of the single-field unique key on field, or throws UnknownField.
std::size_t unique_index(EntityKind kind, std::string_view field) {
    const auto& keys = schema(kind).unique;
    for (std::size_t u = 0; u < keys.size(); ++u) {
        if (keys[u].fields.size() == 1 && keys[u].fields[0] == field) return u;
    }
    throw Error(ErrorCode::UnknownField,
                std::string(field) + " is not a unique key of " + std::string(kind_name(kind)),
                std::string(field));
}

std::string lookup_key(EntityKind kind, std::size_t u, std::string_view value) {
    return schema(kind).unique[u].case_insensitive ? fold_ascii(value) : std::string(value);
}

}  // namespace

std::optional<Json> Reader::last(EntityKind kind) const {
    std::optional<Json> out;
    for_each(kind, [&](const Json& j) { out = j; });
    return out;
}

std::optional<Json> Reader::find_unique(EntityKind kind, std::string_view field,
                                        std::string_view value) const {
    const std::size_t u = unique_index(kind, field);
    const std::string key = lookup_key(kind, u, value);
    std::optional<Json> out;
    for_each(kind, [&](const Json& j) {
        if (!out && unique_key_text(schema(kind).unique[u], j) == key) out = j;
    });
    return out;
}

// ---------------------------------------------------------------- View

std::optional<Json> Store::View::load(EntityKind kind, std::string_view id) const {
    const auto& rows = store_.table(kind).rows;
    auto it = rows.find(std::string(id));
    if (it == rows.end()) return std::nullopt;
    return std::optional<Json>(std::in_place, *it->second.record);
}

void Store::View::for_each(EntityKind kind, const std::function<void(const Json&)>& fn) const {
    const auto& t = store_.table(kind);
    for (const auto& [_, id] : t.order) fn(*t.rows.at(id).record);
}

std::optional<Json> Store::View::last(EntityKind kind) const {
    const auto& t = store_.table(kind);
    if (t.order.empty()) return std::nullopt;
    return std::optional<Json>(std::in_place, *t.rows.at(t.order.rbegin()->second).record);
}

std::optional<Json> Store::View::find_unique(EntityKind kind, std::string_view field,
                                             std::string_view value) const {
    const std::size_t u = unique_index(kind, field);
    const auto& index = store_.table(kind).unique[u];
    auto it = index.find(lookup_key(kind, u, value));
    if (it == index.end()) return std::nullopt;
    return load(kind, it->second);
}

// ---------------------------------------------------------------- Transaction

std::optional<Json> Transaction::load(EntityKind kind, std::string_view id) const {
    const auto& changes = overlay_[kind_index(kind)].changes;
    if (auto it = changes.find(std::string(id)); it != changes.end()) {
        if (!it->second) return std::nullopt;
        return std::optional<Json>(std::in_place, *it->second);
    }
    return store_.view_.load(kind, id);
}

void Transaction::for_each(EntityKind kind, const std::function<void(const Json&)>& fn) const {
    const auto& ov = overlay_[kind_index(kind)];
    const auto& t = store_.table(kind);
    for (const auto& [_, id] : t.order) {
        if (auto it = ov.changes.find(id); it != ov.changes.end()) {
            if (it->second) fn(*it->second);
        } else {
            fn(*t.rows.at(id).record);
        }
    }
    for (const auto& id : ov.inserted) {
        const auto& rec = ov.changes.at(id);
        if (rec) fn(*rec);
    }
}

std::optional<Json> Transaction::last(EntityKind kind) const {
    const auto& ov = overlay_[kind_index(kind)];
    for (auto it = ov.inserted.rbegin(); it != ov.inserted.rend(); ++it) {
        if (const auto& rec = ov.changes.at(*it)) return std::optional<Json>(std::in_place, *rec);
    }
    const auto& t = store_.table(kind);
    for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
        if (auto found = load(kind, it->second)) return found;
    }
    return std::nullopt;
}

std::optional<Json> Transaction::find_unique(EntityKind kind, std::string_view field,
                                             std::string_view value) const {
    const std::size_t u = unique_index(kind, field);
    const std::string key = lookup_key(kind, u, value);
    const UniqueKey& uk = schema(kind).unique[u];
    for (const auto& [id, rec] : overlay_[kind_index(kind)].changes) {
        if (rec && unique_key_text(uk, *rec) == key) return std::optional<Json>(std::in_place, *rec);
    }
    if (auto base = store_.view_.find_unique(kind, field, value)) {
        // The base match only counts if this transaction left it unchanged.
        const auto id = base->at(std::string(schema(kind).id_field));
        const std::string id_text = id.is_string() ? id.get<std::string>() : id.dump();
        if (!overlay_[kind_index(kind)].changes.contains(id_text)) return base;
    }
    return std::nullopt;
}

std::uint64_t& Transaction::next_id(EntityKind kind) {
    auto& ov = overlay_[kind_index(kind)];
    if (!ov.next_id) ov.next_id = store_.table(kind).next_id;
    return *ov.next_id;
}

std::string Transaction::save(EntityKind kind, Json record) {
    const KindSchema& s = schema(kind);
    if (!record.is_object()) throw Error(ErrorCode::BadRequest, "record must be a JSON object");

    std::string id;
    auto id_it = record.find(s.id_field);
    if (s.integer_id) {
        const bool provided = id_it != record.end() && id_it->is_number_integer() &&
                              id_it->get<std::int64_t>() > 0;
        if (provided) {
            id = std::to_string(id_it->get<std::int64_t>());
        } else {
            id = std::to_string(next_id(kind)++);
        }
        record[std::string(s.id_field)] = std::stoll(id);
    } else {
        if (id_it != record.end() && id_it->is_string() && !id_it->get<std::string>().empty()) {
            id = id_it->get<std::string>();
        } else if (s.caller_assigned_id) {
            throw Error(ErrorCode::FieldErrors, std::string(s.id_field) + " is required",
                        std::vector<FieldError>{{std::string(s.id_field), ErrorCode::FieldErrors}});
        } else {
            id = std::string(s.id_prefix) + std::to_string(next_id(kind)++);
        }
        record[std::string(s.id_field)] = id;
    }

    validate_record(kind, record);

    const bool exists = load(kind, id).has_value();
    if (exists && s.immutable) {
        throw Error(ErrorCode::ImmutableKind,
                    std::string(s.name) + " records cannot be updated");
    }
    check_unique(kind, id, record);
    check_references(kind, record);

    if (!exists) {
        if (auto n = numeric_suffix(s, id)) {
            auto& next = next_id(kind);
            next = std::max(next, *n + 1);
        }
    }

    auto& ov = overlay_[kind_index(kind)];
    auto shared = std::make_shared<const Json>(std::move(record));
    const bool in_base = store_.table(kind).rows.contains(id);
    if (!in_base && !ov.changes.contains(id)) ov.inserted.push_back(id);
    ov.changes[id] = shared;
    ops_.push_back({kind, false, id, std::move(shared)});
    return id;
}

bool Transaction::remove(EntityKind kind, std::string_view id) {
    const KindSchema& s = schema(kind);
    if (s.immutable || !s.deletable) {
        throw Error(ErrorCode::ImmutableKind, std::string(s.name) + " records cannot be deleted");
    }
    if (!load(kind, id)) return false;
    if (auto n = count_dependents(kind, id); n > 0) throw Error::dependents(n);

    auto& ov = overlay_[kind_index(kind)];
    ov.changes[std::string(id)] = nullptr;
    ops_.push_back({kind, true, std::string(id), nullptr});
    return true;
}

void Transaction::check_unique(EntityKind kind, const std::string& id, const Json& record) const {
    const KindSchema& s = schema(kind);
    const auto& ov = overlay_[kind_index(kind)];
    const auto& t = store_.table(kind);
    for (std::size_t u = 0; u < s.unique.size(); ++u) {
        const auto key = unique_key_text(s.unique[u], record);
        if (!key) continue;
        auto violation = [&] {
            const std::string fields = join_fields(s.unique[u]);
            return Error(ErrorCode::UniqueViolation, "duplicate value for " + fields, fields);
        };
        if (auto it = t.unique[u].find(*key); it != t.unique[u].end() && it->second != id) {
            auto changed = ov.changes.find(it->second);
            if (changed == ov.changes.end()) throw violation();
            if (changed->second && unique_key_text(s.unique[u], *changed->second) == key) {
                throw violation();
            }
        }
        for (const auto& [other, rec] : ov.changes) {
            if (other != id && rec && unique_key_text(s.unique[u], *rec) == key) throw violation();
        }
    }
}

void Transaction::check_references(EntityKind kind, const Json& record) const {
    const KindSchema& s = schema(kind);
    for (const auto& fk : s.foreign_keys) {
        const Json& v = record.at(std::string(fk.field));
        if (v.is_null() && fk.nullable) continue;
        if (!v.is_string() || !contains(fk.target, v.get<std::string>())) {
            throw Error(ErrorCode::ForeignKeyViolation,
                        std::string(fk.field) + " references a missing " +
                            std::string(kind_name(fk.target)) + " record",
                        std::string(fk.field));
        }
    }
    for (auto field : s.blob_fields) {
        const Json& v = record.at(std::string(field));
        if (v.is_null()) continue;
        if (!store_.blobs_.contains(v.at("digest").get<std::string>())) {
            throw Error(ErrorCode::ForeignKeyViolation,
                        std::string(field) + " references a missing blob", std::string(field));
        }
    }
}

std::size_t Transaction::count_dependents(EntityKind kind, std::string_view id) const {
    std::size_t n = 0;
    for (EntityKind other : kAllKinds) {
        for (const auto& fk : schema(other).foreign_keys) {
            if (fk.target != kind) continue;
            for_each(other, [&](const Json& rec) {
                const Json& v = rec.at(std::string(fk.field));
                if (v.is_string() && v.get<std::string>() == id) ++n;
            });
        }
    }
    return n;
}

// ---------------------------------------------------------------- Store

std::unique_ptr<Store> Store::open(const fs::path& data_dir, StoreOptions options) {
    std::error_code ec;
    if (!fs::exists(data_dir, ec)) {
        if (!options.create_if_missing) {
            throw Error(ErrorCode::IoFailure, "store directory does not exist");
        }
        fs::create_directories(data_dir, ec);
        if (ec) throw Error(ErrorCode::IoFailure, "cannot create store directory");
    }

    const fs::path lock_path = data_dir / "LOCK";
    const int lock_fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd < 0) throw Error(ErrorCode::IoFailure, "cannot open store lock file");
    if (::flock(lock_fd, LOCK_EX | LOCK_NB) != 0) {
        const int err = errno;
        ::close(lock_fd);
        if (err == EWOULDBLOCK) {
            throw Error(ErrorCode::AlreadyLocked, "store is locked by another handle");
        }
        throw Error(ErrorCode::IoFailure, "cannot lock store");
    }

    std::unique_ptr<Store> store(new Store(data_dir, options, lock_fd));
    store->load_from_disk();
    return store;
}

Store::Store(fs::path data_dir, StoreOptions options, int lock_fd)
    : data_dir_(std::move(data_dir)),
      options_(options),
      blobs_(data_dir_ / "blobs", options.sync_writes),
      lock_fd_(lock_fd) {
    for (EntityKind kind : kAllKinds) table(kind).unique.resize(schema(kind).unique.size());
}

Store::~Store() { release(); }

void Store::release() {
    if (wal_fd_ >= 0) ::close(wal_fd_);
    wal_fd_ = -1;
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
    lock_fd_ = -1;
}

void Store::ensure_usable() const {
    if (closed_) throw Error(ErrorCode::IoFailure, "store is closed");
    if (failed_) throw Error(ErrorCode::IoFailure, "store is unusable after a failed write");
}

void Store::load_from_disk() {
    const fs::path manifest = data_dir_ / "manifest";
    std::error_code ec;
    if (fs::exists(manifest, ec)) {
        std::map<std::string, std::string> kv;
        std::istringstream in(read_whole_file(manifest));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) corrupt("manifest line without '='");
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
        if (kv["format_version"] != std::to_string(kFormatVersion)) {
            corrupt("unsupported format_version");
        }
        if (kv["hash_algorithm"] != crypto::kHashAlgorithm) corrupt("unsupported hash_algorithm");
    } else {
        if (fs::exists(entities_dir(data_dir_), ec)) corrupt("manifest missing");
        if (!options_.create_if_missing) {
            throw Error(ErrorCode::IoFailure, "directory is not an archive store");
        }
        for (EntityKind kind : kAllKinds) {
            fs::create_directories(entities_dir(data_dir_) / std::string(kind_name(kind)), ec);
            if (ec) throw Error(ErrorCode::IoFailure, "cannot create entity directory");
        }
        fs::create_directories(data_dir_ / "blobs", ec);
        if (ec) throw Error(ErrorCode::IoFailure, "cannot create blob directory");
        replace_file_atomically(manifest,
                                "format_version=" + std::to_string(kFormatVersion) +
                                    "\nhash_algorithm=" + std::string(crypto::kHashAlgorithm) +
                                    "\n",
                                true);
    }

    for (EntityKind kind : kAllKinds) {
        fs::create_directories(entities_dir(data_dir_) / std::string(kind_name(kind)), ec);
        const fs::path snap = snapshot_path(data_dir_, kind);
        if (!fs::exists(snap, ec)) continue;
        std::istringstream in(read_whole_file(snap));
        std::string line;
        if (!std::getline(in, line)) corrupt("empty snapshot for " + std::string(kind_name(kind)));
        Json header = Json::parse(line, nullptr, false);
        if (header.is_discarded() || !header.contains("applied_seq") ||
            !header.contains("next_id")) {
            corrupt("bad snapshot header for " + std::string(kind_name(kind)));
        }
        const KindSchema& s = schema(kind);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            Json rec = Json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.is_object() || !rec.contains(s.id_field)) {
                corrupt("bad snapshot row for " + std::string(kind_name(kind)));
            }
            apply({kind, false, value_text(rec.at(std::string(s.id_field))),
                   std::make_shared<const Json>(std::move(rec))});
        }
        auto& t = table(kind);
        t.applied_seq = header.at("applied_seq").get<std::uint64_t>();
        t.next_id = std::max(t.next_id, header.at("next_id").get<std::uint64_t>());
        seq_ = std::max(seq_, t.applied_seq);
    }

    replay_wal();
}

void Store::replay_wal() {
    const fs::path path = wal_path(data_dir_);
    std::error_code ec;
    std::string data = fs::exists(path, ec) ? read_whole_file(path) : std::string();

    std::size_t pos = 0;
    std::size_t valid_end = 0;
    while (pos < data.size()) {
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string_view line(data.data() + pos, nl - pos);
        if (line.size() < 66 || line[64] != ' ') break;
        const std::string_view digest = line.substr(0, 64);
        const std::string_view body = line.substr(65);
        if (crypto::sha256_hex(body) != digest) break;
        Json txn = Json::parse(body, nullptr, false);
        if (txn.is_discarded() || !txn.contains("seq") || !txn.contains("ops")) break;
        const auto seq = txn.at("seq").get<std::uint64_t>();
        for (const auto& op : txn.at("ops")) {
            auto kind = parse_kind(op.at("kind").get<std::string>());
            if (!kind) corrupt("unknown kind in WAL");
            if (seq <= table(*kind).applied_seq) continue;
            const bool del = op.at("op").get<std::string>() == "del";
            apply({*kind, del, op.at("id").get<std::string>(),
                   del ? nullptr : std::make_shared<const Json>(op.at("record"))});
        }
        seq_ = std::max(seq_, seq);
        pos = nl + 1;
        valid_end = pos;
    }

    wal_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (wal_fd_ < 0) throw Error(ErrorCode::IoFailure, "cannot open write-ahead log");
    if (valid_end < data.size()) {
        // Torn tail from an interrupted commit.
        if (::ftruncate(wal_fd_, static_cast<off_t>(valid_end)) != 0 || ::fsync(wal_fd_) != 0) {
            throw Error(ErrorCode::IoFailure, "cannot truncate write-ahead log");
        }
    }
    wal_bytes_ = valid_end;
}

void Store::apply(const detail::Op& op) {
    const KindSchema& s = schema(op.kind);
    auto& t = table(op.kind);
    auto existing = t.rows.find(op.id);
    if (existing != t.rows.end()) {
        for (std::size_t u = 0; u < s.unique.size(); ++u) {
            if (auto key = unique_key_text(s.unique[u], *existing->second.record)) {
                t.unique[u].erase(*key);
            }
        }
    }
    if (op.is_delete) {
        if (existing != t.rows.end()) {
            t.order.erase(existing->second.order);
            t.rows.erase(existing);
        }
        return;
    }
    if (existing != t.rows.end()) {
        existing->second.record = op.record;
    } else {
        const auto order = t.next_order++;
        t.order.emplace(order, op.id);
        t.rows.emplace(op.id, detail::Row{order, op.record});
    }
    for (std::size_t u = 0; u < s.unique.size(); ++u) {
        if (auto key = unique_key_text(s.unique[u], *op.record)) t.unique[u][*key] = op.id;
    }
    if (auto n = numeric_suffix(s, op.id)) t.next_id = std::max(t.next_id, *n + 1);
}

void Store::fault(FaultPoint point) {
    FaultHook hook;
    {
        std::lock_guard lock(hook_mutex_);
        hook = fault_hook_;
    }
    if (hook) hook(point);
}

void Store::set_fault_hook(FaultHook hook) {
    std::lock_guard lock(hook_mutex_);
    fault_hook_ = std::move(hook);
}

void Store::append_wal(const std::string& line) {
    auto write_all = [&](std::string_view bytes) {
        std::size_t written = 0;
        while (written < bytes.size()) {
            const ssize_t n = ::write(wal_fd_, bytes.data() + written, bytes.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::IoFailure, "write-ahead log append failed");
            }
            written += static_cast<std::size_t>(n);
        }
    };
    bool hooked;
    {
        std::lock_guard lock(hook_mutex_);
        hooked = static_cast<bool>(fault_hook_);
    }
    if (hooked) {
        const std::size_t half = line.size() / 2;
        write_all(std::string_view(line).substr(0, half));
        ::fdatasync(wal_fd_);
        fault(FaultPoint::WalPartiallyWritten);
        write_all(std::string_view(line).substr(half));
    } else {
        write_all(line);
    }
    if (options_.sync_writes && ::fdatasync(wal_fd_) != 0) {
        throw Error(ErrorCode::IoFailure, "write-ahead log sync failed");
    }
    wal_bytes_ += line.size();
}

void Store::commit(Transaction& tx) {
    if (tx.ops_.empty()) return;
    const std::uint64_t seq = seq_ + 1;

    Json ops = Json::array();
    for (const auto& op : tx.ops_) {
        Json j{{"kind", kind_name(op.kind)}, {"op", op.is_delete ? "del" : "put"}, {"id", op.id}};
        if (!op.is_delete) j["record"] = *op.record;
        ops.push_back(std::move(j));
    }
    const std::string body = Json{{"seq", seq}, {"ops", std::move(ops)}}.dump();
    const std::string line = crypto::sha256_hex(body) + " " + body + "\n";

    try {
        fault(FaultPoint::BeforeWalAppend);
        append_wal(line);
        fault(FaultPoint::WalAppended);
    } catch (...) {
        failed_ = true;
        throw;
    }

    {
        std::unique_lock lock(state_mutex_);
        for (const auto& op : tx.ops_) apply(op);
        seq_ = seq;
    }

    if (wal_bytes_ > options_.checkpoint_wal_bytes) {
        try {
            checkpoint_locked();
        } catch (...) {
            failed_ = true;
            throw;
        }
    }
}

void Store::checkpoint() {
    std::unique_lock wl(write_mutex_);
    ensure_usable();
    checkpoint_locked();
}

// Caller holds write_mutex_, so the tables cannot change underneath.
void Store::checkpoint_locked() {
    for (EntityKind kind : kAllKinds) {
        const auto& t = table(kind);
        std::string content = Json{{"applied_seq", seq_}, {"next_id", t.next_id}}.dump() + "\n";
        for (const auto& [_, id] : t.order) content += t.rows.at(id).record->dump() + "\n";
        replace_file_atomically(snapshot_path(data_dir_, kind), content, true);
    }
    for (EntityKind kind : kAllKinds) table(kind).applied_seq = seq_;
    if (::ftruncate(wal_fd_, 0) != 0 || ::fsync(wal_fd_) != 0) {
        throw Error(ErrorCode::IoFailure, "cannot truncate write-ahead log");
    }
    wal_bytes_ = 0;
}

void Store::close() {
    if (closed_) return;
    if (!failed_) checkpoint();
    release();
    closed_ = true;
}

BlobRef Store::put_blob(std::string_view bytes, std::string_view media_type) {
    ensure_usable();
    if (bytes.size() > options_.max_image_bytes) {
        throw Error(ErrorCode::BlobTooLarge, "image exceeds the configured size limit");
    }
    BlobRef ref = blobs_.put(bytes, media_type);
    fault(FaultPoint::BlobWritten);
    return ref;
}

std::string Store::get_blob(const BlobRef& ref) const {
    ensure_usable();
    return blobs_.get(ref);
}

bool Store::has_blob(std::string_view digest) const { return blobs_.contains(digest); }

bool Store::remove_blob(std::string_view digest) {
    ensure_usable();
    return blobs_.remove(digest);
}

std::string Store::save_entity(EntityKind kind, Json record) {
    return transact([&](Transaction& tx) { return tx.save(kind, std::move(record)); });
}

std::optional<Json> Store::load_entity(EntityKind kind, std::string_view id) const {
    return read([&](const Reader& r) { return r.load(kind, id); });
}

std::vector<Json> Store::query_entities(EntityKind kind, const Predicate& predicate) const {
    return read([&](const Reader& r) { return r.query(kind, predicate); });
}

bool Store::delete_entity(EntityKind kind, std::string_view id) {
    return transact([&](Transaction& tx) { return tx.remove(kind, id); });
}

void export_entities(const Reader& reader, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create export directory");
    for (EntityKind kind : kAllKinds) {
        std::string content;
        reader.for_each(kind, [&](const Json& j) { content += j.dump() + "\n"; });
        write_file_durably(out_dir / (std::string(kind_name(kind)) + ".jsonl"), content, false);
    }
}

}  // namespace archivist::storage
