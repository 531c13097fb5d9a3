#pragma once

#include <string>
#include <vector>

#include "mesovms/history.hpp"
#include "mesovms/network.hpp"
#include "mesovms/types.hpp"

namespace mesovms {

/// Green fractions per phase for every signalized intersection, in network
/// declaration order. Each vector sums to 1 with every entry >= g_min.
struct SignalPlan {
    std::vector<Vector> greens;
};

/// Linear decision rule for responsive signals: per intersection a score
/// matrix (phases x link_count*delta) applied to the stacked normalized
/// history, projected onto the min-green simplex.
struct LdrSignalPolicy {
    std::vector<std::pair<std::string, Matrix>> coefficients;  ///< (node, B)
    int history_depth = 1;
    double g_min = 0.1;

    const Matrix* find(const std::string& node) const {
        for (const auto& [n, m] : coefficients)
            if (n == node) return &m;
        return nullptr;
    }
};

inline constexpr double kDefaultMinGreen = 0.1;

/// Equal split: 1/phase_count for every phase.
Vector default_plan(const Intersection& intersection);

/// Equal splits for all signalized intersections of the network.
SignalPlan default_plan_all(const Network& network);

/// Projection of raw phase scores onto {g >= g_min, sum g = 1}: shift the
/// scores to s - min(s) + 1, normalize to sum 1, then blend
///   g = g_min + (1 - phase_count*g_min) * normalized.
Vector project_splits(const VectorRef& scores, double g_min);

/// Evaluates the signal decision rule for every signalized intersection.
/// Intersections without a coefficient matrix fall back to equal splits.
SignalPlan ldr_splits(const LdrSignalPolicy& policy, const Network& network,
                      const StateHistory& history, const VectorRef& reference);

}  // namespace mesovms
