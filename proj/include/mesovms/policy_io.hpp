#pragma once

#include <optional>
#include <string>

#include "mesovms/signal.hpp"
#include "mesovms/vms.hpp"

namespace mesovms {

/// Trained coefficients on disk: a flat text record with a version header.
/// Either segment may be absent (policies trained for one controller only).
/// Numbers are written shortest-round-trip, so save/load is bit-exact.
struct PolicyRecord {
    int delta = 1;
    std::optional<LdrVmsPolicy> vms;
    std::optional<LdrSignalPolicy> signal;
};

std::string policy_to_text(const PolicyRecord& record);
PolicyRecord policy_from_text(const std::string& text);

PolicyRecord load_policy(const std::string& path);
void save_policy(const PolicyRecord& record, const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace mesovms
