#pragma once

#include <filesystem>
#include <string_view>

namespace archivist::storage {

// Writes (truncating) and optionally fsyncs. Throws Error{IoFailure}.
void write_file_durably(const std::filesystem::path& path, std::string_view bytes, bool sync);

void sync_directory(const std::filesystem::path& dir);

// Writes to a sibling temp file, then renames over path.
void replace_file_atomically(const std::filesystem::path& path, std::string_view bytes, bool sync);

}  // namespace archivist::storage
