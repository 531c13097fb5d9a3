#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mesovms/demand.hpp"
#include "mesovms/history.hpp"
#include "mesovms/network.hpp"
#include "mesovms/rng.hpp"
#include "mesovms/signal.hpp"
#include "mesovms/vms.hpp"

namespace mesovms {

enum class AgentKind { Background, Target };

/// One simulated vehicle. Background agents have no fixed route and draw a
/// turn at every junction; target agents commit to a full link path when
/// they are injected.
struct Agent {
    int id = 0;
    AgentKind kind = AgentKind::Background;
    std::string origin;
    std::string destination;      ///< for background agents, filled on exit
    int entry_step = 0;
    int exit_step = -1;           ///< -1 while still in the network
    bool counted = true;          ///< false when injected during warm-up
    bool chose_route1 = false;    ///< targets only
    std::vector<int> path;        ///< link indices; fixed for targets, log for background
    std::vector<int> entry_steps; ///< step of entry onto each link of `path`
};

struct SimConfig {
    int horizon = 60;             ///< T, steps
    double step_seconds = 60.0;
    int warmup_steps = 5;         ///< agents entering during these steps are not counted
    std::uint64_t rng_seed = 1;
    double target_share = 0.8;    ///< target agents per background vehicle on influenced ODs
};

/// Scripted replays a fixed per-step message sequence (open-loop), used by
/// brute-force oracles and debugging; the CLI does not expose it.
enum class VmsStrategy { None, Genuine, Ldr, Scripted };
enum class SignalStrategy { FixedEqual, Ldr };

/// Display strategy plus the driver response model.
struct VmsControllerSpec {
    VmsStrategy strategy = VmsStrategy::None;
    LdrVmsPolicy policy;                       ///< used when strategy == Ldr
    GenuineBands bands;                        ///< used when strategy == Genuine
    std::vector<VmsMessage> script;            ///< used when strategy == Scripted
    ComplianceProfile profile =
        ComplianceProfile({0.9, 0.7, 0.5, 0.3, 0.1});
};

struct SignalControllerSpec {
    SignalStrategy strategy = SignalStrategy::FixedEqual;
    LdrSignalPolicy policy;                    ///< used when strategy == Ldr
};

/// Per-step record: the decision taken for the step and the route volumes
/// the controller saw when taking it (state at the end of the previous step).
struct DecisionRecord {
    int step = 0;
    VmsMessage message = VmsMessage::NoDisplay;
    SignalPlan splits;
    double v_route1 = 0.0;
    double v_route2 = 0.0;
    long injected_so_far = 0;
    long completed_so_far = 0;
    long occupancy_total = 0;
};

struct SimResult {
    /// Network-wide average travel time per vehicle, seconds. Empty when no
    /// agent was counted (e.g. a zero-demand day).
    std::optional<double> mean_travel_time_s;
    int total_agents = 0;
    int completed_agents = 0;
    int stranded_agents = 0;
    int counted_agents = 0;
    std::vector<double> per_agent_travel_steps;  ///< counted agents, in id order
    std::vector<DecisionRecord> decision_log;    ///< one per step
    std::vector<Agent> agents;
};

/// Discrete-time network loading engine. Construction compiles the network
/// into index tables; run() is then callable repeatedly. A Simulator holds
/// no mutable state between runs and is safe to share across sequential
/// runs; concurrent runs should each build their own (construction is cheap).
class Simulator {
public:
    /// Keeps a reference; the network must outlive the simulator.
    explicit Simulator(const Network& network);
    explicit Simulator(Network&&) = delete;

    /// One full run. Deterministic given (inputs, config.rng_seed). When
    /// `trace` is set, writes one CSV row per step
    /// (step,message,greens...,occupancies...).
    SimResult run(const DemandDay& day, const VmsControllerSpec& vms,
                  const SignalControllerSpec& signal, const SimConfig& config,
                  std::ostream* trace = nullptr) const;

    const Network& network() const { return network_; }
    const Vector& reference() const { return reference_; }

private:
    struct QueueEntry {
        int agent;
        int scheduled_exit;
    };
    struct TurnTable {
        std::vector<int> out_links;          ///< link indices, id-sorted
        std::vector<double> probabilities;
    };
    struct NodeInfo {
        bool is_zone = false;
        int intersection = -1;               ///< index into network.intersections
        int sole_out = -1;                   ///< link index when exactly one exit
        std::map<int, TurnTable> turning;    ///< by incoming link index
    };

    struct RunState;

    void inject_step(RunState& rs, const DemandDay& day, int step, VmsMessage message,
                     const VmsControllerSpec& vms, const SimConfig& config) const;
    void discharge_step(RunState& rs, int step, const std::vector<double>& link_green) const;
    void enter_link(RunState& rs, int agent, int link, int step) const;
    std::vector<double> link_greens(const SignalPlan& plan) const;
    std::vector<int> target_path(int entry_link, bool route1, const std::string& dest) const;

    const Network& network_;
    Vector reference_;
    int n_links_ = 0;
    std::map<std::string, NodeInfo> nodes_;
    std::vector<int> signalized_;                    ///< intersection indices, network order
    std::vector<std::vector<std::pair<int, int>>> green_phases_;
    ///< per link: (signalized position, phase index) pairs that green it

    std::vector<int> route1_links_, route2_links_;   ///< vms choice routes, as indices
    std::map<std::string, std::vector<std::string>> influenced_dests_;  ///< origin -> dests
    std::map<std::string, std::pair<std::vector<int>, std::vector<double>>> entry_choices_;
    std::map<std::pair<int, std::string>, std::vector<int>> tail_cache_;
    ///< shortest link path from a route-end link's head node to a zone
};

}  // namespace mesovms
