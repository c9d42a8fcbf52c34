#pragma once

#include <string>
#include <string_view>

namespace themekit {

// SHA-256, hex-encoded. Used for content-addressing pipeline artifacts.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

}  // namespace themekit
