#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "archivist/domain/types.hpp"

namespace archivist::storage {

// Content-addressed byte store: data_dir/blobs/<first-2-hex>/<digest>.
// Blobs are immutable once written; identical bytes map to the same file.
class BlobStore {
public:
    BlobStore(std::filesystem::path root, bool sync_writes);

    // Writes bytes if not already present. Does not enforce a size limit.
    BlobRef put(std::string_view bytes, std::string_view media_type);

    // Reads and re-hashes. Throws BlobNotFound, or IntegrityFailure when the
    // stored bytes no longer hash to ref.digest.
    std::string get(const BlobRef& ref) const;

    bool contains(std::string_view digest) const;
    bool remove(std::string_view digest);

    std::filesystem::path path_for(std::string_view digest) const;

private:
    std::filesystem::path root_;
    bool sync_writes_;
};

bool is_hex_digest(std::string_view digest) noexcept;

}  // namespace archivist::storage
