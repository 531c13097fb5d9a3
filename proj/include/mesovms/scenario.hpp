#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mesovms/demand.hpp"
#include "mesovms/network.hpp"
#include "mesovms/sim.hpp"
#include "mesovms/vms.hpp"

namespace mesovms {

/// Everything one experiment needs: network, driver-response profiles,
/// simulation defaults, and the train/test demand days. Immutable after load.
struct ScenarioBundle {
    std::string name;
    std::string description;
    Network network;
    /// Named profiles in listed order (strongest Route-2 advice first).
    std::vector<std::pair<std::string, std::array<double, 5>>> compliance_profiles;
    std::string default_profile;
    SimConfig sim;  ///< rng_seed here is a placeholder; runners override it
    GenuineBands genuine_bands;
    std::vector<DemandDay> train_days;
    std::vector<DemandDay> test_days;

    ComplianceProfile profile(const std::string& name) const;
    ComplianceProfile default_compliance() const { return profile(default_profile); }
};

inline constexpr int kScenarioFormatVersion = 1;

/// Canonical serialization: sorted keys, fixed indentation, shortest
/// round-trip numbers. save(load(f)) reproduces f byte for byte.
std::string scenario_to_json(const ScenarioBundle& bundle);
ScenarioBundle scenario_from_json(const std::string& text);

ScenarioBundle load_scenario(const std::string& path);
void save_scenario(const ScenarioBundle& bundle, const std::string& path);

/// The shipped 24-link two-route grid: entry zones a and b feed fork A,
/// where the sign is visible; routes 1 and 2 run through signalized
/// intersections I1/I3 and I2/I4 to merge B and exit zones e and f; zones c
/// and d add uninfluenced cross traffic. All parameters are synthetic.
Network builtin_network();

/// Smooth peak-hour base rates for the builtin network's origins.
DemandModel builtin_demand_model(double sigma);

/// Assembles the full bundle: builtin network and profiles plus `n_days`
/// synthesized demand days, first half (rounded up) for training.
ScenarioBundle builtin_scenario(int n_days, double sigma, std::uint64_t seed);

/// SHA-256 of the canonical serialization of the given days; training
/// reports embed it so the exact data behind a policy is identifiable.
std::string demand_days_fingerprint(const std::vector<DemandDay>& days);

}  // namespace mesovms
