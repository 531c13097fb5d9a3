#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mesovms/policy_io.hpp"
#include "mesovms/scenario.hpp"
#include "mesovms/sim.hpp"

namespace mesovms {

/// Which controller each side of the system runs during training/evaluation.
struct StrategySelection {
    VmsStrategy vms = VmsStrategy::Ldr;
    SignalStrategy signal = SignalStrategy::FixedEqual;
};

/// K demand days, each simulated R times per objective evaluation.
struct TrainingSet {
    std::vector<DemandDay> days;
    int replications = 3;
};

struct PsoConfig {
    int particle_count = 20;
    int max_iterations = 30;
    double c1 = 2.0;
    double c2 = 2.0;
    /// Per-coordinate velocity cap as a fraction of that coordinate's
    /// initialization range.
    double clamp_fraction = 0.2;
    std::uint64_t rng_seed = 1;
};

/// Maps the flat PSO decision vector onto controller policies. Segment
/// order: VMS coefficients, VMS thresholds (when trainable), then one
/// row-major matrix per signalized intersection.
class DecisionLayout {
public:
    DecisionLayout(const Network& network, StrategySelection selection, int delta,
                   bool train_thresholds = true);

    int size() const { return size_; }
    StrategySelection selection() const { return selection_; }
    int delta() const { return delta_; }

    /// Zero coefficients; thresholds at their symmetric defaults. Decodes to
    /// the constant-NoDisplay, equal-split baseline.
    Vector baseline() const;
    Vector init_lo() const { return lo_; }
    Vector init_hi() const { return hi_; }

    /// Builds the controller specs encoded by x. The thresholds segment is
    /// sorted ascending and nudged apart, so every x decodes to a valid
    /// policy. Profile and bands are left at their defaults for the caller.
    std::pair<VmsControllerSpec, SignalControllerSpec> decode(const VectorRef& x) const;

    /// Policy record holding only the trained segments.
    PolicyRecord to_record(const VectorRef& x) const;

private:
    StrategySelection selection_;
    int delta_;
    int link_count_;
    bool train_vms_ = false;
    bool train_thresholds_ = false;
    bool train_signal_ = false;
    std::vector<std::pair<std::string, int>> signal_nodes_;  ///< (node, phase count)
    int size_ = 0;
    int vms_offset_ = 0, thresholds_offset_ = 0, signal_offset_ = 0;
    Vector lo_, hi_;
};

/// Inputs shared by every objective evaluation in one training run.
struct ObjectiveContext {
    const Simulator& simulator;
    const DecisionLayout& layout;
    const TrainingSet& training;
    SimConfig sim;                 ///< rng_seed is overwritten per (day, rep)
    ComplianceProfile profile;
    GenuineBands bands;
    std::uint64_t seed = 1;        ///< base of the common-random-number streams
};

/// Sample-average objective: mean travel time over K days x R replications,
/// each replication seeded by derive_seed(seed, day, rep) so every candidate
/// sees identical streams. Pure function of (context, x).
double estimate_objective(const ObjectiveContext& context, const VectorRef& x);

struct PsoResult {
    Vector best;
    double best_value = 0.0;
    std::vector<double> trace;  ///< best value after each iteration, non-increasing
    long evaluations = 0;
};

/// Bare global-best particle swarm: per iteration and particle, move by the
/// current velocity, evaluate, update personal/global bests on strict
/// improvement, then v += c1 r1 (P - X) + c2 r2 (G - X) with scalar
/// r1, r2 ~ U(0,1) and a per-coordinate clamp. Velocities start at zero, so
/// the first iteration scores the seeded positions unchanged.
PsoResult pso_minimize(const std::function<double(const VectorRef&)>& objective,
                       const Vector& init_lo, const Vector& init_hi, const PsoConfig& config,
                       const Vector* seed_particle = nullptr);

struct TrainOutcome {
    PolicyRecord policy;
    double best_value = 0.0;
    double baseline_value = 0.0;  ///< objective of the zero policy, same streams
    std::vector<double> trace;
    long evaluations = 0;
    double wall_seconds = 0.0;
    std::string report;
};

/// Full offline training pass. Requires at least one LDR controller in the
/// selection and a training set with some demand. The swarm is seeded with
/// the zero policy, so best_value <= baseline_value always holds.
TrainOutcome train(const ScenarioBundle& scenario, StrategySelection selection,
                   const TrainingSet& training, const PsoConfig& pso, int delta,
                   const ComplianceProfile& profile, bool train_thresholds = true);

}  // namespace mesovms
