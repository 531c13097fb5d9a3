#include "mesovms/vms.hpp"

#include <algorithm>
#include <sstream>

namespace mesovms {

const char* to_string(VmsMessage m) {
    switch (m) {
        case VmsMessage::Route1Strong: return "route1_strong";
        case VmsMessage::Route1Moderate: return "route1_moderate";
        case VmsMessage::NoDisplay: return "no_display";
        case VmsMessage::Route2Moderate: return "route2_moderate";
        case VmsMessage::Route2Strong: return "route2_strong";
    }
    return "?";
}

VmsMessage message_from_string(const std::string& name) {
    for (int i = 0; i < kMessageCount; ++i) {
        auto m = static_cast<VmsMessage>(i);
        if (name == to_string(m)) return m;
    }
    throw DataError("unknown VMS message name: " + name);
}

ComplianceProfile::ComplianceProfile(const std::array<double, 5>& by_message)
    : shares_(by_message) {
    for (double c : shares_)
        if (!(c > 0.0 && c < 1.0))
            throw DataError("compliance rates must lie strictly in (0,1)");
    for (std::size_t i = 1; i < shares_.size(); ++i)
        if (shares_[i] > shares_[i - 1] + 1e-12)
            throw DataError(
                "compliance rates must be non-increasing from Route1Strong to Route2Strong");
}

ComplianceProfile ComplianceProfile::from_listed(const std::array<double, 5>& listed) {
    std::array<double, 5> by_message;
    for (std::size_t i = 0; i < 5; ++i) by_message[i] = listed[4 - i];
    return ComplianceProfile(by_message);
}

std::array<double, 5> ComplianceProfile::listed() const {
    std::array<double, 5> out;
    for (std::size_t i = 0; i < 5; ++i) out[i] = shares_[4 - i];
    return out;
}

std::string ComplianceProfile::listed_string() const {
    std::ostringstream os;
    auto l = listed();
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (i) os << ';';
        os << l[i];
    }
    return os.str();
}

double ldr_score(const LdrVmsPolicy& policy, const StateHistory& history,
                 const VectorRef& reference) {
    const Eigen::Index expected = policy.history_depth * history.link_count();
    if (policy.coefficients.size() != expected)
        throw ConfigError("ldr_score: coefficient vector length " +
                          std::to_string(policy.coefficients.size()) + ", expected " +
                          std::to_string(expected));
    return policy.coefficients.dot(
        history.stacked_normalized(policy.history_depth, reference));
}

VmsMessage project_message(double score, const std::array<double, 4>& thresholds) {
    if (score <= thresholds[0]) return VmsMessage::Route1Strong;
    if (score <= thresholds[1]) return VmsMessage::Route1Moderate;
    if (score <= thresholds[2]) return VmsMessage::NoDisplay;
    if (score <= thresholds[3]) return VmsMessage::Route2Moderate;
    return VmsMessage::Route2Strong;
}

VmsMessage genuine_message_from_diff(double diff, const GenuineBands& bands) {
    if (diff < -bands.far) return VmsMessage::Route1Strong;
    if (diff < -bands.near) return VmsMessage::Route1Moderate;
    if (diff <= bands.near) return VmsMessage::NoDisplay;
    if (diff <= bands.far) return VmsMessage::Route2Moderate;
    return VmsMessage::Route2Strong;
}

double route_volume(const VectorRef& occupancy, const Network& network, const Route& route) {
    double total = 0.0;
    for (const auto& id : route.links) {
        int idx = network.link_index(id);
        if (idx < 0) throw ConfigError("route_volume: unknown link " + id);
        total += occupancy[idx];
    }
    return total;
}

VmsMessage genuine_message(const VectorRef& occupancy, const Network& network,
                           const Route& route1, const Route& route2,
                           const GenuineBands& bands) {
    double diff = route_volume(occupancy, network, route1) -
                  route_volume(occupancy, network, route2);
    return genuine_message_from_diff(diff, bands);
}

bool choose_route1(VmsMessage message, const ComplianceProfile& profile, Rng& rng) {
    return rng.bernoulli(profile.route1_share(message));
}

}  // namespace mesovms
