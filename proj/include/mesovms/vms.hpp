#pragma once

#include <array>
#include <string>

#include "mesovms/history.hpp"
#include "mesovms/network.hpp"
#include "mesovms/rng.hpp"
#include "mesovms/types.hpp"

namespace mesovms {

/// The five display states, ordered to match the threshold bins of the
/// decision rule (smallest score on the left).
enum class VmsMessage {
    Route1Strong = 0,
    Route1Moderate = 1,
    NoDisplay = 2,
    Route2Moderate = 3,
    Route2Strong = 4,
};

inline constexpr int kMessageCount = 5;

const char* to_string(VmsMessage m);
VmsMessage message_from_string(const std::string& name);

/// Does the message recommend either route? NoDisplay recommends neither.
inline bool recommends_route1(VmsMessage m) {
    return m == VmsMessage::Route1Strong || m == VmsMessage::Route1Moderate;
}
inline bool recommends_route2(VmsMessage m) {
    return m == VmsMessage::Route2Strong || m == VmsMessage::Route2Moderate;
}

/// Probability that an influenced driver picks Route 1 under each message.
/// Indexed by VmsMessage; non-increasing from Route1Strong to Route2Strong.
class ComplianceProfile {
public:
    /// `by_message[m]` is the Route-1 share under message m.
    explicit ComplianceProfile(const std::array<double, 5>& by_message);

    /// Builds from the conventional listing order, strongest Route-2 advice
    /// first (so "0.1,0.3,0.5,0.7,0.9" gives Route1Strong a 0.9 share).
    static ComplianceProfile from_listed(const std::array<double, 5>& listed);

    double route1_share(VmsMessage m) const {
        return shares_[static_cast<std::size_t>(m)];
    }
    /// The listing-order view (strongest Route-2 advice first).
    std::array<double, 5> listed() const;
    std::string listed_string() const;  ///< "0.1;0.3;0.5;0.7;0.9"

private:
    std::array<double, 5> shares_;
};

/// Linear decision rule for the VMS: score = A . stacked normalized history,
/// then threshold projection onto the five messages.
struct LdrVmsPolicy {
    Vector coefficients;                 ///< length link_count * history_depth
    int history_depth = 1;               ///< delta
    std::array<double, 4> thresholds{};  ///< strictly increasing
};

inline constexpr std::array<double, 4> kDefaultThresholds{-2.0, -0.5, 0.5, 2.0};

/// Volume-difference bands for the truthful display baseline.
struct GenuineBands {
    double near = 10.0;
    double far = 30.0;
};

/// Score of the decision rule: dot product of the coefficients with the
/// stacked normalized history [q(t-1); ...; q(t-delta)].
double ldr_score(const LdrVmsPolicy& policy, const StateHistory& history,
                 const VectorRef& reference);

/// Threshold projection of the score onto the message set; bins are
/// half-open with each boundary belonging to the left bin.
VmsMessage project_message(double score, const std::array<double, 4>& thresholds);

/// Truthful display from the route volume difference d = V_route1 - V_route2:
/// recommends the emptier route, stronger the larger |d|.
VmsMessage genuine_message_from_diff(double diff, const GenuineBands& bands);

/// Occupancy summed over a route's links.
double route_volume(const VectorRef& occupancy, const Network& network, const Route& route);

VmsMessage genuine_message(const VectorRef& occupancy, const Network& network,
                           const Route& route1, const Route& route2,
                           const GenuineBands& bands);

/// One RNG draw; true = Route 1.
bool choose_route1(VmsMessage message, const ComplianceProfile& profile, Rng& rng);

}  // namespace mesovms
