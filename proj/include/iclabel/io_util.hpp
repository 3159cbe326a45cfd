#pragma once

#include <string>

namespace iclabel::io {

// Writes via a sibling temp file and rename, so interrupted runs never leave
// truncated outputs.
void atomic_write_file(const std::string& path, const std::string& contents);

// printf-style "%.17g" with the C locale; round-trips doubles exactly.
std::string format_double(double v);

}  // namespace iclabel::io
