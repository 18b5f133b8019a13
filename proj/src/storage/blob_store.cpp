#include "archivist/storage/blob_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <fstream>
#include <iterator>

#include "archivist/crypto.hpp"
#include "archivist/error.hpp"
#include "fs_util.hpp"

namespace archivist::storage {

namespace fs = std::filesystem;

bool is_hex_digest(std::string_view digest) noexcept {
    return digest.size() == 64 && std::all_of(digest.begin(), digest.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

BlobStore::BlobStore(fs::path root, bool sync_writes)
    : root_(std::move(root)), sync_writes_(sync_writes) {}

fs::path BlobStore::path_for(std::string_view digest) const {
    return root_ / std::string(digest.substr(0, 2)) / std::string(digest);
}

BlobRef BlobStore::put(std::string_view bytes, std::string_view media_type) {
    BlobRef ref{crypto::sha256_hex(bytes), bytes.size(), std::string(media_type)};
    const fs::path target = path_for(ref.digest);

    std::error_code ec;
    if (fs::exists(target, ec) && fs::file_size(target, ec) == bytes.size()) return ref;

    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create blob directory");
    const fs::path tmp =
        target.parent_path() / (".tmp-" + crypto::to_hex(crypto::random_bytes(8)));
    write_file_durably(tmp, bytes, sync_writes_);
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoFailure, "cannot publish blob");
    }
    if (sync_writes_) sync_directory(target.parent_path());
    return ref;
}

std::string BlobStore::get(const BlobRef& ref) const {
    if (!is_hex_digest(ref.digest)) throw Error(ErrorCode::BlobNotFound, "blob not found");
    std::ifstream in(path_for(ref.digest), std::ios::binary);
    if (!in) throw Error(ErrorCode::BlobNotFound, "blob not found");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoFailure, "blob read failed");
    if (bytes.size() != ref.size_bytes || crypto::sha256_hex(bytes) != ref.digest) {
        throw Error(ErrorCode::IntegrityFailure, "stored image failed integrity verification");
    }
    return bytes;
}

bool BlobStore::contains(std::string_view digest) const {
    if (!is_hex_digest(digest)) return false;
    std::error_code ec;
    return fs::exists(path_for(digest), ec);
}

bool BlobStore::remove(std::string_view digest) {
    if (!is_hex_digest(digest)) return false;
    std::error_code ec;
    return fs::remove(path_for(digest), ec);
}

}  // namespace archivist::storage
