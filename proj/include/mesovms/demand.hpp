#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mesovms/types.hpp"

namespace mesovms {

/// One realization of time-varying entry demand: per origin zone, the number
/// of vehicles entering during each time step.
struct DemandDay {
    std::string label;
    std::string provenance = "synthetic";  ///< "synthetic" | "measured"
    std::map<std::string, std::vector<int>> origins;

    int horizon() const {
        return origins.empty() ? 0 : static_cast<int>(origins.begin()->second.size());
    }
    long total() const;
};

/// Generative stand-in for measured detector data: a smooth per-origin base
/// profile, a lognormal day-to-day multiplier (mean 1, spread sigma), and
/// Poisson counts within the day.
struct DemandModel {
    std::map<std::string, std::vector<double>> base_rates;  ///< per origin, length T
    double sigma = 0.3;
};

/// Deterministic per seed. Draw order: per day, first the day multiplier
/// (two raw draws), then Poisson counts per origin in map order, per step.
/// Labels are consecutive dates starting at `start_date` (YYYY-MM-DD).
std::vector<DemandDay> synthesize_days(const DemandModel& model, int n_days, int horizon,
                                       std::uint64_t seed,
                                       const std::string& start_date = "2016-02-01");

/// Fills missing entries by linear interpolation between the nearest present
/// neighbors (edge gaps take the nearest value), rounding half-up. Refuses
/// (DataError, naming each offending origin) when an origin is more than
/// half missing.
DemandDay fill_gaps(const std::string& label,
                    const std::map<std::string, std::vector<std::optional<int>>>& raw);

/// "YYYY-MM-DD" plus `days` calendar days.
std::string add_days(const std::string& date, int days);

}  // namespace mesovms
