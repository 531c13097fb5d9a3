#include "mesovms/demand.hpp"

#include <cmath>
#include <cstdio>

#include "mesovms/rng.hpp"

namespace mesovms {

long DemandDay::total() const {
    long sum = 0;
    for (const auto& [zone, counts] : origins)
        for (int c : counts) sum += c;
    return sum;
}

std::string add_days(const std::string& date, int days) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(date.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
        throw DataError("bad date: " + date);
    auto leap = [](int year) {
        return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    };
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    for (int i = 0; i < days; ++i) {
        int month_len = lengths[m - 1] + (m == 2 && leap(y) ? 1 : 0);
        if (++d > month_len) {
            d = 1;
            if (++m > 12) {
                m = 1;
                ++y;
            }
        }
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::vector<DemandDay> synthesize_days(const DemandModel& model, int n_days, int horizon,
                                       std::uint64_t seed, const std::string& start_date) {
    if (n_days < 1) throw ContractError("synthesize_days: n_days must be >= 1");
    if (model.sigma < 0.0) throw DataError("demand model sigma must be >= 0");
    for (const auto& [zone, rates] : model.base_rates) {
        if (static_cast<int>(rates.size()) != horizon)
            throw DataError("base rate profile for " + zone + " does not match horizon");
        for (double r : rates)
            if (r < 0.0) throw DataError("negative base rate for " + zone);
    }

    Rng rng(seed);
    std::vector<DemandDay> days;
    days.reserve(static_cast<std::size_t>(n_days));
    for (int d = 0; d < n_days; ++d) {
        // exp(N(-sigma^2/2, sigma)) has mean 1 for any sigma.
        double multiplier =
            std::exp(-0.5 * model.sigma * model.sigma + model.sigma * rng.normal01());
        DemandDay day;
        day.label = add_days(start_date, d);
        day.provenance = "synthetic";
        for (const auto& [zone, rates] : model.base_rates) {
            std::vector<int> counts(static_cast<std::size_t>(horizon), 0);
            for (int t = 0; t < horizon; ++t)
                counts[static_cast<std::size_t>(t)] = rng.poisson(multiplier * rates[t]);
            day.origins[zone] = std::move(counts);
        }
        days.push_back(std::move(day));
    }
    return days;
}

DemandDay fill_gaps(const std::string& label,
                    const std::map<std::string, std::vector<std::optional<int>>>& raw) {
    std::string over_limit;
    for (const auto& [zone, series] : raw) {
        if (series.empty()) continue;
        std::size_t missing = 0;
        for (const auto& v : series)
            if (!v) ++missing;
        if (2 * missing > series.size())
            over_limit += (over_limit.empty() ? "" : ", ") + zone + " (" +
                          std::to_string(missing) + "/" + std::to_string(series.size()) +
                          " missing)";
    }
    if (!over_limit.empty())
        throw DataError("fill_gaps: more than half missing for origin(s): " + over_limit);

    DemandDay day;
    day.label = label;
    day.provenance = "measured";
    for (const auto& [zone, series] : raw) {
        const int n = static_cast<int>(series.size());
        std::vector<int> filled(series.size(), 0);
        for (int i = 0; i < n; ++i) {
            if (series[static_cast<std::size_t>(i)]) {
                filled[static_cast<std::size_t>(i)] = *series[static_cast<std::size_t>(i)];
                continue;
            }
            int left = i - 1;
            while (left >= 0 && !series[static_cast<std::size_t>(left)]) --left;
            int right = i + 1;
            while (right < n && !series[static_cast<std::size_t>(right)]) ++right;
            double value;
            if (left < 0 && right >= n)
                throw DataError("fill_gaps: origin " + zone + " has no data at all");
            if (left < 0)
                value = *series[static_cast<std::size_t>(right)];
            else if (right >= n)
                value = *series[static_cast<std::size_t>(left)];
            else {
                double lv = *series[static_cast<std::size_t>(left)];
                double rv = *series[static_cast<std::size_t>(right)];
                value = lv + (rv - lv) * (i - left) / static_cast<double>(right - left);
            }
            filled[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(value + 0.5));
        }
        day.origins[zone] = std::move(filled);
    }
    return day;
}

}  // namespace mesovms
