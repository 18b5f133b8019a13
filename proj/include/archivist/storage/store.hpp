#pragma once

// Durable entity collections plus the blob area.
//
// Layout under data_dir:
//   manifest                          format_version / hash_algorithm lines
//   LOCK                              flock()ed by the single writer
//   entities/wal.log                  committed transactions since the last checkpoint
//   entities/<kind>/snapshot.jsonl    checkpointed rows, insertion order
//   blobs/<first-2-hex>/<digest>
//
// A transaction is one WAL line, "<sha256-of-json> <json>\n". On open the
// snapshots are loaded and the WAL replayed; a torn or corrupt tail line is a
// transaction that never committed and is truncated away.

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "archivist/domain/serialize.hpp"
#include "archivist/storage/blob_store.hpp"
#include "archivist/storage/entity_kind.hpp"
#include "archivist/storage/predicate.hpp"

namespace archivist::storage {

inline constexpr std::uint64_t kDefaultMaxImageBytes = 25ull * 1024 * 1024;

struct StoreOptions {
    bool create_if_missing = true;
    std::uint64_t max_image_bytes = kDefaultMaxImageBytes;
    // fsync WAL appends and blob files. Bulk loaders may turn this off and
    // rely on the checkpoint at close().
    bool sync_writes = true;
    std::uint64_t checkpoint_wal_bytes = 32ull * 1024 * 1024;
};

// Points where the fault hook is invoked during writes.
enum class FaultPoint {
    BlobWritten,
    BeforeWalAppend,
    // Half of the WAL line is on disk.
    WalPartiallyWritten,
    // The WAL line is durable but not yet visible in memory.
    WalAppended,
};

// Thrown by test fault hooks to emulate the process dying at a FaultPoint.
struct SimulatedCrash : std::runtime_error {
    explicit SimulatedCrash(FaultPoint p)
        : std::runtime_error("simulated crash"), point(p) {}
    FaultPoint point;
};

using FaultHook = std::function<void(FaultPoint)>;

// Read access to entity collections.
class Reader {
public:
    virtual ~Reader() = default;

    virtual std::optional<Json> load(EntityKind kind, std::string_view id) const = 0;
    // Visits committed records in insertion order.
    virtual void for_each(EntityKind kind, const std::function<void(const Json&)>& fn) const = 0;
    // Most recently inserted record.
    virtual std::optional<Json> last(EntityKind kind) const;
    // Lookup through a single-field unique key of the kind.
    virtual std::optional<Json> find_unique(EntityKind kind, std::string_view field,
                                            std::string_view value) const;

    // Throws UnknownField when the predicate names a field the kind lacks.
    std::vector<Json> query(EntityKind kind, const Predicate& predicate = {}) const;
    std::size_t count(EntityKind kind) const;
    bool contains(EntityKind kind, std::string_view id) const { return load(kind, id).has_value(); }

    template <typename T>
    std::optional<T> get(EntityKind kind, std::string_view id) const {
        auto j = load(kind, id);
        if (!j) return std::nullopt;
        return decode<T>(*j);
    }

    template <typename T>
    std::vector<T> all(EntityKind kind, const Predicate& predicate = {}) const {
        predicate.check(kind);
        std::vector<T> out;
        for_each(kind, [&](const Json& j) {
            if (predicate.matches(j)) out.push_back(decode<T>(j));
        });
        return out;
    }
};

namespace detail {

struct Row {
    std::uint64_t order;
    std::shared_ptr<const Json> record;
};

struct Table {
    std::map<std::uint64_t, std::string> order;
    std::unordered_map<std::string, Row> rows;
    std::uint64_t next_order = 1;
    std::uint64_t next_id = 1;
    std::uint64_t applied_seq = 0;
    // One index per schema unique key: key text -> id.
    std::vector<std::unordered_map<std::string, std::string>> unique;
};

struct Op {
    EntityKind kind;
    bool is_delete;
    std::string id;
    std::shared_ptr<const Json> record;
};

}  // namespace detail

class Store;

// Staged writes on top of the committed state. Reads see the staged changes.
// Constraint checks run eagerly in save/remove, so a violation throws before
// anything reaches disk.
class Transaction final : public Reader {
public:
    std::optional<Json> load(EntityKind kind, std::string_view id) const override;
    void for_each(EntityKind kind, const std::function<void(const Json&)>& fn) const override;
    std::optional<Json> last(EntityKind kind) const override;
    std::optional<Json> find_unique(EntityKind kind, std::string_view field,
                                    std::string_view value) const override;

    // Inserts when the id field is empty (or null/0 for integer ids) or names
    // an absent record; otherwise updates in place. Returns the stored id.
    std::string save(EntityKind kind, Json record);

    // False when already absent. Throws ImmutableKind or HasDependents.
    bool remove(EntityKind kind, std::string_view id);

    bool empty() const noexcept { return ops_.empty(); }

private:
    friend class Store;
    explicit Transaction(Store& store) : store_(store) {}

    struct Overlay {
        // id -> new record, or nullptr when deleted in this transaction.
        std::unordered_map<std::string, std::shared_ptr<const Json>> changes;
        std::vector<std::string> inserted;
        std::optional<std::uint64_t> next_id;
    };

    std::uint64_t& next_id(EntityKind kind);
    void check_unique(EntityKind kind, const std::string& id, const Json& record) const;
    void check_references(EntityKind kind, const Json& record) const;
    std::size_t count_dependents(EntityKind kind, std::string_view id) const;

    Store& store_;
    std::array<Overlay, 8> overlay_;
    std::vector<detail::Op> ops_;
};

class Store {
public:
    // Throws AlreadyLocked, CorruptStore or IoFailure.
    static std::unique_ptr<Store> open(const std::filesystem::path& data_dir,
                                       StoreOptions options = {});
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& data_dir() const noexcept { return data_dir_; }
    const StoreOptions& options() const noexcept { return options_; }

    // Blobs. put_blob throws BlobTooLarge above options().max_image_bytes.
    BlobRef put_blob(std::string_view bytes, std::string_view media_type);
    std::string get_blob(const BlobRef& ref) const;
    bool has_blob(std::string_view digest) const;
    bool remove_blob(std::string_view digest);
    const BlobStore& blobs() const noexcept { return blobs_; }

    // Single-entity convenience wrappers around transact()/read().
    std::string save_entity(EntityKind kind, Json record);
    std::optional<Json> load_entity(EntityKind kind, std::string_view id) const;
    std::vector<Json> query_entities(EntityKind kind, const Predicate& predicate = {}) const;
    bool delete_entity(EntityKind kind, std::string_view id);

    // Runs fn against a consistent committed state. Writers are excluded
    // only while a commit is being applied in memory.
    template <typename F>
    decltype(auto) read(F&& fn) const {
        std::shared_lock lock(state_mutex_);
        ensure_usable();
        return fn(static_cast<const Reader&>(view_));
    }

    // Runs fn with exclusive write access, then commits everything it staged
    // as one atomic unit. If fn throws nothing is written.
    template <typename F>
    decltype(auto) transact(F&& fn) {
        std::unique_lock lock(write_mutex_);
        ensure_usable();
        Transaction tx(*this);
        if constexpr (std::is_void_v<std::invoke_result_t<F, Transaction&>>) {
            fn(tx);
            commit(tx);
        } else {
            auto result = fn(tx);
            commit(tx);
            return result;
        }
    }

    // Folds the WAL into per-kind snapshots.
    void checkpoint();
    // Checkpoints and releases the lock. The destructor only releases the lock.
    void close();

    void set_fault_hook(FaultHook hook);

    std::uint64_t last_seq() const noexcept { return seq_; }

private:
    friend class Transaction;

    class View final : public Reader {
    public:
        explicit View(const Store& store) : store_(store) {}
        std::optional<Json> load(EntityKind kind, std::string_view id) const override;
        void for_each(EntityKind kind, const std::function<void(const Json&)>& fn) const override;
        std::optional<Json> last(EntityKind kind) const override;
        std::optional<Json> find_unique(EntityKind kind, std::string_view field,
                                        std::string_view value) const override;

    private:
        const Store& store_;
    };

    Store(std::filesystem::path data_dir, StoreOptions options, int lock_fd);

    void ensure_usable() const;
    void load_from_disk();
    void replay_wal();
    void commit(Transaction& tx);
    void checkpoint_locked();
    void fault(FaultPoint point);
    void apply(const detail::Op& op);
    void append_wal(const std::string& line);
    void release();

    const detail::Table& table(EntityKind kind) const { return tables_[kind_index(kind)]; }
    detail::Table& table(EntityKind kind) { return tables_[kind_index(kind)]; }

    std::filesystem::path data_dir_;
    StoreOptions options_;
    BlobStore blobs_;
    int lock_fd_ = -1;
    int wal_fd_ = -1;
    std::uint64_t wal_bytes_ = 0;
    std::uint64_t seq_ = 0;
    std::array<detail::Table, 8> tables_;
    View view_{*this};

    mutable std::shared_mutex state_mutex_;
    std::mutex write_mutex_;
    std::mutex hook_mutex_;
    FaultHook fault_hook_;
    std::atomic<bool> failed_{false};
    bool closed_ = false;
};

// Writes <out_dir>/<kind>.jsonl for all eight kinds, one canonical record per
// line in insertion order.
void export_entities(const Reader& reader, const std::filesystem::path& out_dir);

// Field-set check used by save(): the record must be an object carrying
// exactly the kind's fields with values the domain model accepts.
void validate_record(EntityKind kind, const Json& record);

}  // namespace archivist::storage
