#pragma once

#include <string>

namespace mesovms {

/// SHA-256 digest of `data`, lowercase hex. Used to fingerprint training
/// inputs in reports; not a security boundary.
std::string sha256_hex(const std::string& data);

}  // namespace mesovms
