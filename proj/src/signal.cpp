#include "mesovms/signal.hpp"

namespace mesovms {

Vector default_plan(const Intersection& intersection) {
    const auto p = static_cast<Eigen::Index>(intersection.phases.size());
    if (p == 0) throw ConfigError("default_plan: intersection " + intersection.node +
                                  " has no phases");
    return Vector::Constant(p, 1.0 / static_cast<double>(p));
}

SignalPlan default_plan_all(const Network& network) {
    SignalPlan plan;
    for (const auto& inter : network.intersections)
        if (inter.signalized()) plan.greens.push_back(default_plan(inter));
    return plan;
}

Vector project_splits(const VectorRef& scores, double g_min) {
    const Eigen::Index p = scores.size();
    if (p == 0) throw ConfigError("project_splits: empty score vector");
    if (g_min * static_cast<double>(p) >= 1.0)
        throw ConfigError("project_splits: g_min * phase_count must be < 1");
    Vector shifted = scores.array() - scores.minCoeff() + 1.0;
    Vector normalized = shifted / shifted.sum();
    return Vector::Constant(p, g_min) +
           (1.0 - g_min * static_cast<double>(p)) * normalized;
}

SignalPlan ldr_splits(const LdrSignalPolicy& policy, const Network& network,
                      const StateHistory& history, const VectorRef& reference) {
    SignalPlan plan;
    Vector stacked = history.stacked_normalized(policy.history_depth, reference);
    for (const auto& inter : network.intersections) {
        if (!inter.signalized()) continue;
        const Matrix* coeff = policy.find(inter.node);
        if (!coeff) {
            plan.greens.push_back(default_plan(inter));
            continue;
        }
        if (coeff->rows() != static_cast<Eigen::Index>(inter.phases.size()) ||
            coeff->cols() != stacked.size())
            throw ConfigError("ldr_splits: coefficient matrix for " + inter.node +
                              " has wrong shape");
        plan.greens.push_back(project_splits(*coeff * stacked, policy.g_min));
    }
    return plan;
}

}  // namespace mesovms
