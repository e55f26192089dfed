#pragma once

#include <string>
#include <string_view>

namespace tnar::util {

// Hex SHA-1 of "blob <size>\0<content>", i.e. what `git hash-object` prints.
std::string git_blob_hash(std::string_view content);

// git_blob_hash of a file's bytes; throws std::ios_base::failure if unreadable.
std::string file_git_hash(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace tnar::util
