#pragma once

#include <string>
#include <string_view>

#include "coaplan/document.hpp"

namespace coaplan {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Digest of a JSON value in its compact, key-sorted serialization.
std::string json_digest(const Json& value);

}  // namespace coaplan
