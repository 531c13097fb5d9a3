#include "mesovms/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace mesovms {

DecisionLayout::DecisionLayout(const Network& network, StrategySelection selection, int delta,
                               bool train_thresholds)
    : selection_(selection), delta_(delta), link_count_(static_cast<int>(network.links.size())) {
    if (delta < 1) throw ConfigError("history depth must be >= 1");
    train_vms_ = selection.vms == VmsStrategy::Ldr;
    train_signal_ = selection.signal == SignalStrategy::Ldr;
    train_thresholds_ = train_vms_ && train_thresholds;
    if (!train_vms_ && !train_signal_)
        throw ConfigError("nothing trainable: neither controller is an LDR");

    int n = 0;
    vms_offset_ = 0;
    if (train_vms_) n += link_count_ * delta_;
    thresholds_offset_ = n;
    if (train_thresholds_) n += 4;
    signal_offset_ = n;
    if (train_signal_) {
        for (const Intersection& ix : network.intersections)
            if (ix.signalized()) {
                signal_nodes_.emplace_back(ix.node, static_cast<int>(ix.phases.size()));
                n += static_cast<int>(ix.phases.size()) * link_count_ * delta_;
            }
        if (signal_nodes_.empty())
            throw ConfigError("signal LDR selected but the network has no signalized intersections");
    }
    size_ = n;

    lo_ = Vector(n);
    hi_ = Vector(n);
    int i = 0;
    if (train_vms_)
        for (int k = 0; k < link_count_ * delta_; ++k, ++i) {
            lo_[i] = -1.0;
            hi_[i] = 1.0;
        }
    // Thresholds double as the rule's bias: the score of an empty network is
    // always 0, so boxes must straddle 0 for every cut or the empty-state
    // message is locked to NoDisplay.
    if (train_thresholds_)
        for (int k = 0; k < 4; ++k, ++i) {
            lo_[i] = kDefaultThresholds[static_cast<std::size_t>(k)] - 2.5;
            hi_[i] = kDefaultThresholds[static_cast<std::size_t>(k)] + 2.5;
        }
    if (train_signal_)
        for (; i < n; ++i) {
            lo_[i] = -0.5;
            hi_[i] = 0.5;
        }
}

Vector DecisionLayout::baseline() const {
    Vector x = Vector::Zero(size_);
    if (train_thresholds_)
        for (int k = 0; k < 4; ++k)
            x[thresholds_offset_ + k] = kDefaultThresholds[static_cast<std::size_t>(k)];
    return x;
}

std::pair<VmsControllerSpec, SignalControllerSpec> DecisionLayout::decode(
    const VectorRef& x) const {
    if (x.size() != size_) throw ConfigError("decision vector has the wrong length");
    VmsControllerSpec vms;
    SignalControllerSpec signal;
    vms.strategy = selection_.vms;
    signal.strategy = selection_.signal;
    if (train_vms_) {
        vms.policy.history_depth = delta_;
        vms.policy.coefficients = x.segment(vms_offset_, link_count_ * delta_);
        std::array<double, 4> m = kDefaultThresholds;
        if (train_thresholds_) {
            for (int k = 0; k < 4; ++k) m[static_cast<std::size_t>(k)] = x[thresholds_offset_ + k];
            std::sort(m.begin(), m.end());
            for (int k = 1; k < 4; ++k) {
                auto ku = static_cast<std::size_t>(k);
                if (m[ku] <= m[ku - 1]) m[ku] = m[ku - 1] + 1e-9;
            }
        }
        vms.policy.thresholds = m;
    }
    if (train_signal_) {
        signal.policy.history_depth = delta_;
        signal.policy.g_min = kDefaultMinGreen;
        int off = signal_offset_;
        int cols = link_count_ * delta_;
        for (const auto& [node, phases] : signal_nodes_) {
            Matrix b(phases, cols);
            for (int r = 0; r < phases; ++r, off += cols)
                b.row(r) = x.segment(off, cols).transpose();
            signal.policy.coefficients.emplace_back(node, std::move(b));
        }
    }
    return {std::move(vms), std::move(signal)};
}

PolicyRecord DecisionLayout::to_record(const VectorRef& x) const {
    auto [vms, signal] = decode(x);
    PolicyRecord record;
    record.delta = delta_;
    if (train_vms_) record.vms = std::move(vms.policy);
    if (train_signal_) record.signal = std::move(signal.policy);
    return record;
}

double estimate_objective(const ObjectiveContext& context, const VectorRef& x) {
    const TrainingSet& training = context.training;
    if (training.days.empty()) throw ConfigError("training set has no days");
    if (training.replications < 1) throw ConfigError("replications must be >= 1");
    auto [vms, signal] = context.layout.decode(x);
    vms.profile = context.profile;
    vms.bands = context.bands;
    double total = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < training.days.size(); ++i) {
        const DemandDay& day = training.days[i];
        for (int r = 0; r < training.replications; ++r) {
            SimConfig cfg = context.sim;
            cfg.rng_seed = derive_seed(context.seed, i, static_cast<std::uint64_t>(r));
            SimResult result;
            try {
                result = context.simulator.run(day, vms, signal, cfg);
            } catch (const ConfigError& e) {
                throw ConfigError("day " + day.label + ": " + e.what());
            } catch (const DataError& e) {
                throw DataError("day " + day.label + ": " + e.what());
            }
            if (!result.mean_travel_time_s)
                throw DataError("day " + day.label + " produced no counted vehicles");
            total += *result.mean_travel_time_s;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

PsoResult pso_minimize(const std::function<double(const VectorRef&)>& objective,
                       const Vector& init_lo, const Vector& init_hi, const PsoConfig& config,
                       const Vector* seed_particle) {
    const Eigen::Index n = init_lo.size();
    if (init_hi.size() != n || n == 0) throw ConfigError("initialization box is malformed");
    for (Eigen::Index d = 0; d < n; ++d)
        if (init_hi[d] < init_lo[d]) throw ConfigError("initialization box is malformed");
    if (config.particle_count < 2) throw ConfigError("need at least 2 particles");
    if (config.max_iterations < 1) throw ConfigError("need at least 1 iteration");
    if (config.c1 <= 0.0 || config.c2 <= 0.0) throw ConfigError("c1 and c2 must be positive");
    if (config.clamp_fraction <= 0.0) throw ConfigError("clamp fraction must be positive");
    if (seed_particle != nullptr && seed_particle->size() != n)
        throw ConfigError("seed particle has the wrong length");

    Rng rng(config.rng_seed);
    const int J = config.particle_count;
    Vector clamp = config.clamp_fraction * (init_hi - init_lo);
    std::vector<Vector> position(static_cast<std::size_t>(J));
    std::vector<Vector> velocity(static_cast<std::size_t>(J), Vector::Zero(n));
    std::vector<Vector> personal(static_cast<std::size_t>(J));
    std::vector<double> personal_value(static_cast<std::size_t>(J),
                                       std::numeric_limits<double>::infinity());
    for (int j = 0; j < J; ++j) {
        auto ju = static_cast<std::size_t>(j);
        if (j == 0 && seed_particle != nullptr) {
            position[ju] = *seed_particle;
        } else {
            position[ju] = Vector(n);
            for (Eigen::Index d = 0; d < n; ++d)
                position[ju][d] = init_lo[d] + rng.uniform01() * (init_hi[d] - init_lo[d]);
        }
        personal[ju] = position[ju];
    }

    PsoResult out;
    Vector best;
    double best_value = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        for (int j = 0; j < J; ++j) {
            auto ju = static_cast<std::size_t>(j);
            position[ju] += velocity[ju];
            double value = objective(position[ju]);
            ++out.evaluations;
            if (!std::isfinite(value))
                throw ContractError("objective returned a non-finite value at particle " +
                                    std::to_string(j));
            if (value < personal_value[ju]) {
                personal_value[ju] = value;
                personal[ju] = position[ju];
            }
            if (value < best_value) {
                best_value = value;
                best = position[ju];
            }
            double r1 = rng.uniform01();
            double r2 = rng.uniform01();
            velocity[ju] += config.c1 * r1 * (personal[ju] - position[ju]) +
                            config.c2 * r2 * (best - position[ju]);
            for (Eigen::Index d = 0; d < n; ++d)
                velocity[ju][d] = std::clamp(velocity[ju][d], -clamp[d], clamp[d]);
        }
        out.trace.push_back(best_value);
    }
    out.best = std::move(best);
    out.best_value = best_value;
    return out;
}

namespace {

const char* vms_name(VmsStrategy s) {
    switch (s) {
        case VmsStrategy::None: return "none";
        case VmsStrategy::Genuine: return "genuine";
        case VmsStrategy::Ldr: return "ldr";
        case VmsStrategy::Scripted: return "scripted";
    }
    return "?";
}

const char* signal_name(SignalStrategy s) {
    return s == SignalStrategy::Ldr ? "ldr" : "default";
}

}  // namespace

TrainOutcome train(const ScenarioBundle& scenario, StrategySelection selection,
                   const TrainingSet& training, const PsoConfig& pso, int delta,
                   const ComplianceProfile& profile, bool train_thresholds) {
    if (selection.vms != VmsStrategy::Ldr && selection.signal != SignalStrategy::Ldr)
        throw ConfigError("nothing trainable: neither controller is an LDR");
    if (training.days.empty()) throw DataError("training set has no days");
    long total_demand = 0;
    for (const DemandDay& day : training.days) total_demand += day.total();
    if (total_demand == 0)
        throw DataError("degenerate training set: every demand day is empty");

    auto t0 = std::chrono::steady_clock::now();
    Simulator simulator(scenario.network);
    DecisionLayout layout(scenario.network, selection, delta, train_thresholds);
    ObjectiveContext context{simulator,        layout,
                             training,         scenario.sim,
                             profile,          scenario.genuine_bands,
                             pso.rng_seed};
    Vector base = layout.baseline();
    auto objective = [&context](const VectorRef& x) { return estimate_objective(context, x); };
    PsoResult result = pso_minimize(objective, layout.init_lo(), layout.init_hi(), pso, &base);
    double baseline_value = estimate_objective(context, base);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    TrainOutcome out;
    out.policy = layout.to_record(result.best);
    out.best_value = result.best_value;
    out.baseline_value = baseline_value;
    out.trace = result.trace;
    out.evaluations = result.evaluations;
    out.wall_seconds = wall;

    std::ostringstream report;
    report << "mesovms training report\n";
    report << "scenario " << scenario.name << "\n";
    report << "vms " << vms_name(selection.vms) << "\n";
    report << "signal " << signal_name(selection.signal) << "\n";
    report << "compliance " << profile.listed_string() << "\n";
    report << "days " << training.days.size() << "\n";
    report << "replications " << training.replications << "\n";
    report << "delta " << delta << "\n";
    report << "particles " << pso.particle_count << "\n";
    report << "iterations " << pso.max_iterations << "\n";
    report << "c1 " << pso.c1 << "\n";
    report << "c2 " << pso.c2 << "\n";
    report << "clamp_fraction " << pso.clamp_fraction << "\n";
    report << "seed " << pso.rng_seed << "\n";
    report << "dimension " << layout.size() << "\n";
    report << "train_data_sha256 " << demand_days_fingerprint(training.days) << "\n";
    report << "baseline_objective_s " << format_double(baseline_value) << "\n";
    report << "best_objective_s " << format_double(out.best_value) << "\n";
    report << "evaluations " << out.evaluations << "\n";
    report << "wall_seconds " << wall << "\n";
    report << "trace\n";
    for (std::size_t i = 0; i < out.trace.size(); ++i)
        report << "  " << (i + 1) << " " << format_double(out.trace[i]) << "\n";
    out.report = report.str();
    return out;
}

}  // namespace mesovms
