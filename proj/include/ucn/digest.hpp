#pragma once

#include <string>

namespace ucn {

// FNV-1a 64-bit digest of a file, as 16 hex chars. Integrity hint for run
// manifests; not cryptographic.
std::string file_digest(const std::string& path);

}  // namespace ucn
