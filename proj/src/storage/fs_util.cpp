#include "fs_util.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>

#include "archivist/error.hpp"

namespace archivist::storage {

namespace fs = std::filesystem;

void write_file_durably(const fs::path& path, std::string_view bytes, bool sync) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorCode::IoFailure, "cannot open file for writing");
    std::size_t written = 0;
    while (written < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            throw Error(ErrorCode::IoFailure, "write failed");
        }
        written += static_cast<std::size_t>(n);
    }
    if (sync && ::fsync(fd) != 0) {
        ::close(fd);
        throw Error(ErrorCode::IoFailure, "fsync failed");
    }
    if (::close(fd) != 0) throw Error(ErrorCode::IoFailure, "close failed");
}

void sync_directory(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

void replace_file_atomically(const fs::path& path, std::string_view bytes, bool sync) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_file_durably(tmp, bytes, sync);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "rename failed");
    if (sync) sync_directory(path.parent_path());
}

}  // namespace archivist::storage
