#include "mesovms/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mesovms {

namespace {

/// Uniform index in [0, n). One raw draw.
int uniform_index(Rng& rng, int n) {
    int idx = static_cast<int>(rng.uniform01() * n);
    return std::min(idx, n - 1);
}

/// Fewest-link path between two nodes, expanding outgoing links in index
/// order so ties resolve to the lowest-numbered links.
std::vector<int> shortest_link_path(const Network& network,
                                    const std::map<std::string, std::vector<int>>& outs_by_node,
                                    const std::string& from, const std::string& to) {
    if (from == to) return {};
    std::map<std::string, std::pair<std::string, int>> pred;  // node -> (prev node, via link)
    std::vector<std::string> frontier{from};
    pred[from] = {"", -1};
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& node : frontier) {
            auto it = outs_by_node.find(node);
            if (it == outs_by_node.end()) continue;
            for (int li : it->second) {
                const std::string& head = network.links[static_cast<std::size_t>(li)].to_node;
                if (pred.count(head)) continue;
                pred[head] = {node, li};
                if (head == to) {
                    std::vector<int> path;
                    std::string cur = to;
                    while (cur != from) {
                        path.push_back(pred[cur].second);
                        cur = pred[cur].first;
                    }
                    std::reverse(path.begin(), path.end());
                    return path;
                }
                next.push_back(head);
            }
        }
        frontier = std::move(next);
    }
    throw ConfigError("no path from node " + from + " to zone " + to);
}

}  // namespace

struct Simulator::RunState {
    explicit RunState(std::uint64_t seed) : rng(seed) {}
    std::vector<Agent> agents;
    std::vector<std::deque<QueueEntry>> queues;
    std::vector<int> last_sched;
    Rng rng;
    long injected = 0;
    long completed = 0;
};

Simulator::Simulator(const Network& network) : network_(network) {
    n_links_ = static_cast<int>(network.links.size());
    if (n_links_ == 0) throw ConfigError("network has no links");
    reference_ = reference_occupancy(network);

    auto must_index = [&](const std::string& id) {
        int li = network.link_index(id);
        if (li < 0) throw ConfigError("reference to unknown link " + id);
        return li;
    };

    std::map<std::string, std::vector<int>> outs_by_node;
    for (int li = 0; li < n_links_; ++li) {
        const Link& l = network.links[static_cast<std::size_t>(li)];
        outs_by_node[l.from_node].push_back(li);
        nodes_[l.from_node];
        nodes_[l.to_node];
    }
    for (const auto& zone : network.zones) nodes_[zone].is_zone = true;

    for (int ii = 0; ii < static_cast<int>(network.intersections.size()); ++ii) {
        const Intersection& ix = network.intersections[static_cast<std::size_t>(ii)];
        NodeInfo& ni = nodes_[ix.node];
        ni.intersection = ii;
        for (const auto& [in_id, outs] : ix.turning) {
            std::vector<std::pair<int, double>> items;
            for (const auto& [out_id, p] : outs)
                if (p > 0.0) items.emplace_back(must_index(out_id), p);
            std::sort(items.begin(), items.end());
            TurnTable table;
            for (const auto& [oi, p] : items) {
                table.out_links.push_back(oi);
                table.probabilities.push_back(p);
            }
            ni.turning[must_index(in_id)] = std::move(table);
        }
    }
    for (auto& [node, ni] : nodes_) {
        auto it = outs_by_node.find(node);
        if (it != outs_by_node.end() && it->second.size() == 1) ni.sole_out = it->second.front();
    }

    green_phases_.assign(static_cast<std::size_t>(n_links_), {});
    for (int ii = 0; ii < static_cast<int>(network.intersections.size()); ++ii) {
        const Intersection& ix = network.intersections[static_cast<std::size_t>(ii)];
        if (!ix.signalized()) continue;
        int pos = static_cast<int>(signalized_.size());
        signalized_.push_back(ii);
        for (int p = 0; p < static_cast<int>(ix.phases.size()); ++p) {
            std::set<int> greened;
            for (const Movement& mv : ix.phases[static_cast<std::size_t>(p)].movements)
                greened.insert(must_index(mv.in_link));
            for (int li : greened) green_phases_[static_cast<std::size_t>(li)].emplace_back(pos, p);
        }
    }

    for (const auto& [zone, weights] : network.entry_links) {
        std::vector<std::pair<int, double>> items;
        for (const auto& [id, w] : weights)
            if (w > 0.0) items.emplace_back(must_index(id), w);
        std::sort(items.begin(), items.end());
        auto& [links, ws] = entry_choices_[zone];
        for (const auto& [li, w] : items) {
            links.push_back(li);
            ws.push_back(w);
        }
    }

    if (!network.vms.route1.empty() || !network.vms.route2.empty()) {
        const Route* r1 = network.find_route(network.vms.route1);
        const Route* r2 = network.find_route(network.vms.route2);
        if (r1 == nullptr || r2 == nullptr)
            throw ConfigError("vms placement names a route that does not exist");
        if (r1->links.empty() || r2->links.empty())
            throw ConfigError("vms choice routes must contain at least one link");
        for (const auto& id : r1->links) route1_links_.push_back(must_index(id));
        for (const auto& id : r2->links) route2_links_.push_back(must_index(id));

        for (const OdPair& od : network.vms.influenced_od_pairs) {
            auto& dests = influenced_dests_[od.origin];
            if (std::find(dests.begin(), dests.end(), od.destination) == dests.end())
                dests.push_back(od.destination);
        }

        const std::string& fork1 = network.links[static_cast<std::size_t>(route1_links_.front())].from_node;
        const std::string& fork2 = network.links[static_cast<std::size_t>(route2_links_.front())].from_node;
        for (const auto& [origin, dests] : influenced_dests_) {
            auto it = entry_choices_.find(origin);
            if (it == entry_choices_.end() || it->second.first.empty())
                throw ConfigError("influenced origin " + origin + " has no entry links");
            for (int li : it->second.first) {
                const std::string& head = network.links[static_cast<std::size_t>(li)].to_node;
                if (head != fork1 || head != fork2)
                    throw ConfigError("entry link " + network.links[static_cast<std::size_t>(li)].id +
                                      " does not end at the choice-route fork");
            }
            for (int end_link : {route1_links_.back(), route2_links_.back()}) {
                const std::string& merge =
                    network.links[static_cast<std::size_t>(end_link)].to_node;
                for (const auto& dest : dests)
                    tail_cache_[{end_link, dest}] =
                        shortest_link_path(network, outs_by_node, merge, dest);
            }
        }
    }
}

std::vector<double> Simulator::link_greens(const SignalPlan& plan) const {
    if (plan.greens.size() != signalized_.size())
        throw ContractError("signal plan does not match the signalized intersections");
    std::vector<double> greens(static_cast<std::size_t>(n_links_), 1.0);
    for (int li = 0; li < n_links_; ++li) {
        const auto& phases = green_phases_[static_cast<std::size_t>(li)];
        if (phases.empty()) continue;
        double g = 0.0;
        for (const auto& [pos, p] : phases) g += plan.greens[static_cast<std::size_t>(pos)][p];
        greens[static_cast<std::size_t>(li)] = std::min(1.0, g);
    }
    return greens;
}

std::vector<int> Simulator::target_path(int entry_link, bool route1,
                                        const std::string& dest) const {
    const auto& corridor = route1 ? route1_links_ : route2_links_;
    auto it = tail_cache_.find({corridor.back(), dest});
    if (it == tail_cache_.end())
        throw ContractError("no cached tail toward destination " + dest);
    std::vector<int> path;
    path.reserve(1 + corridor.size() + it->second.size());
    path.push_back(entry_link);
    path.insert(path.end(), corridor.begin(), corridor.end());
    path.insert(path.end(), it->second.begin(), it->second.end());
    return path;
}

void Simulator::enter_link(RunState& rs, int agent, int link, int step) const {
    auto& queue = rs.queues[static_cast<std::size_t>(link)];
    double occupancy = static_cast<double>(queue.size());
    int tt = link_travel_time(network_.links[static_cast<std::size_t>(link)], occupancy);
    // Exit no earlier than the vehicle ahead keeps the queue FIFO in both
    // insertion order and scheduled exit.
    int sched = std::max(step + tt, rs.last_sched[static_cast<std::size_t>(link)]);
    queue.push_back({agent, sched});
    rs.last_sched[static_cast<std::size_t>(link)] = sched;
    Agent& ag = rs.agents[static_cast<std::size_t>(agent)];
    if (ag.kind == AgentKind::Background) ag.path.push_back(link);
    ag.entry_steps.push_back(step);
}

void Simulator::inject_step(RunState& rs, const DemandDay& day, int step, VmsMessage message,
                            const VmsControllerSpec& vms, const SimConfig& config) const {
    // Draw order per origin (zones in name order): entry link per background
    // vehicle (one draw when the zone has several entry links), then the
    // fractional-count draw for the extra influenced vehicles, then per
    // influenced vehicle its entry link, destination and route choice.
    for (const auto& [zone, counts] : day.origins) {
        int k = counts[static_cast<std::size_t>(step)];
        if (k < 0) throw DataError("negative demand count at origin " + zone);
        if (k == 0) continue;
        auto ec = entry_choices_.find(zone);
        if (ec == entry_choices_.end())
            throw DataError("origin " + zone + " has demand but no entry links");
        const auto& [entry_links, entry_weights] = ec->second;

        auto pick_entry = [&]() {
            if (entry_links.size() == 1) return entry_links.front();
            return entry_links[rs.rng.weighted_index(entry_weights)];
        };

        for (int i = 0; i < k; ++i) {
            int entry = pick_entry();
            int id = static_cast<int>(rs.agents.size());
            Agent ag;
            ag.id = id;
            ag.kind = AgentKind::Background;
            ag.origin = zone;
            ag.entry_step = step;
            ag.counted = step >= config.warmup_steps;
            rs.agents.push_back(std::move(ag));
            enter_link(rs, id, entry, step);
            ++rs.injected;
        }

        auto inf = influenced_dests_.find(zone);
        if (inf == influenced_dests_.end()) continue;
        double want = config.target_share * k;
        int extra = static_cast<int>(std::floor(want));
        double frac = want - extra;
        if (frac > 0.0 && rs.rng.bernoulli(frac)) ++extra;
        const auto& dests = inf->second;
        for (int i = 0; i < extra; ++i) {
            int entry = pick_entry();
            int di = dests.size() >= 2 ? uniform_index(rs.rng, static_cast<int>(dests.size())) : 0;
            bool route1 = choose_route1(message, vms.profile, rs.rng);
            int id = static_cast<int>(rs.agents.size());
            Agent ag;
            ag.id = id;
            ag.kind = AgentKind::Target;
            ag.origin = zone;
            ag.destination = dests[static_cast<std::size_t>(di)];
            ag.entry_step = step;
            ag.counted = step >= config.warmup_steps;
            ag.chose_route1 = route1;
            ag.path = target_path(entry, route1, ag.destination);
            rs.agents.push_back(std::move(ag));
            enter_link(rs, id, entry, step);
            ++rs.injected;
        }
    }
}

void Simulator::discharge_step(RunState& rs, int step,
                               const std::vector<double>& link_green) const {
    for (int li = 0; li < n_links_; ++li) {
        auto& queue = rs.queues[static_cast<std::size_t>(li)];
        if (queue.empty()) continue;
        const Link& link = network_.links[static_cast<std::size_t>(li)];
        int budget = static_cast<int>(
            std::ceil(link_green[static_cast<std::size_t>(li)] * link.capacity_per_step - 1e-9));
        const NodeInfo& head = nodes_.at(link.to_node);
        while (budget > 0 && !queue.empty() && queue.front().scheduled_exit <= step) {
            int a = queue.front().agent;
            queue.pop_front();
            --budget;
            Agent& ag = rs.agents[static_cast<std::size_t>(a)];
            if (ag.kind == AgentKind::Target) {
                std::size_t cursor = ag.entry_steps.size();
                if (cursor < ag.path.size()) {
                    enter_link(rs, a, ag.path[cursor], step);
                } else {
                    if (!head.is_zone || link.to_node != ag.destination)
                        throw ContractError("influenced vehicle left its path before " +
                                            ag.destination);
                    ag.exit_step = step;
                    ++rs.completed;
                }
            } else if (head.is_zone) {
                ag.destination = link.to_node;
                ag.exit_step = step;
                ++rs.completed;
            } else {
                int next;
                auto ti = head.turning.find(li);
                if (ti != head.turning.end()) {
                    const TurnTable& table = ti->second;
                    next = table.out_links.size() == 1
                               ? table.out_links.front()
                               : table.out_links[rs.rng.weighted_index(table.probabilities)];
                } else if (head.sole_out >= 0) {
                    next = head.sole_out;
                } else {
                    throw ContractError("no turning rule for link " + link.id + " at node " +
                                        link.to_node);
                }
                enter_link(rs, a, next, step);
            }
        }
    }
}

SimResult Simulator::run(const DemandDay& day, const VmsControllerSpec& vms,
                         const SignalControllerSpec& signal, const SimConfig& config,
                         std::ostream* trace) const {
    if (config.horizon < 1) throw ConfigError("horizon must be at least 1 step");
    if (config.warmup_steps < 0 || config.warmup_steps > config.horizon)
        throw ConfigError("warm-up must lie within the horizon");
    if (config.step_seconds <= 0.0) throw ConfigError("step length must be positive");
    if (config.target_share < 0.0) throw ConfigError("influenced share must be >= 0");
    for (const auto& [zone, counts] : day.origins) {
        auto ni = nodes_.find(zone);
        if (ni == nodes_.end() || !ni->second.is_zone)
            throw DataError("demand origin " + zone + " is not a zone of the network");
        if (static_cast<int>(counts.size()) < config.horizon)
            throw DataError("demand at origin " + zone + " is shorter than the horizon");
    }
    if (vms.strategy != VmsStrategy::None && route1_links_.empty())
        throw ConfigError("vms control needs the two choice routes configured");
    if (vms.strategy == VmsStrategy::Scripted &&
        static_cast<int>(vms.script.size()) < config.horizon)
        throw ConfigError("message script shorter than the horizon");
    int depth = 1;
    if (vms.strategy == VmsStrategy::Ldr) {
        if (vms.policy.history_depth < 1) throw ConfigError("history depth must be >= 1");
        const auto& m = vms.policy.thresholds;
        if (!(m[0] < m[1] && m[1] < m[2] && m[2] < m[3]))
            throw ConfigError("message thresholds must be strictly increasing");
        depth = std::max(depth, vms.policy.history_depth);
    }
    if (signal.strategy == SignalStrategy::Ldr) {
        if (signal.policy.history_depth < 1) throw ConfigError("history depth must be >= 1");
        depth = std::max(depth, signal.policy.history_depth);
    }
    if (config.horizon < depth + 1)
        throw ConfigError("horizon must be at least history depth + 1");

    RunState rs(config.rng_seed);
    rs.queues.assign(static_cast<std::size_t>(n_links_), {});
    rs.last_sched.assign(static_cast<std::size_t>(n_links_), 0);
    StateHistory history(depth, n_links_);
    SimResult out;

    SignalPlan fixed_plan = default_plan_all(network_);
    std::vector<double> fixed_greens = link_greens(fixed_plan);

    if (trace != nullptr) {
        *trace << "step,message,v_route1,v_route2";
        for (int pos : signalized_) {
            const Intersection& ix = network_.intersections[static_cast<std::size_t>(pos)];
            for (std::size_t p = 0; p < ix.phases.size(); ++p)
                *trace << ",g_" << ix.node << "_" << p;
        }
        for (const Link& l : network_.links) *trace << ",x_" << l.id;
        *trace << "\n";
    }

    for (int t = 0; t < config.horizon; ++t) {
        // Route volumes the controller can see: state at the end of step t-1.
        double v1 = 0.0, v2 = 0.0;
        for (int li : route1_links_) v1 += static_cast<double>(rs.queues[static_cast<std::size_t>(li)].size());
        for (int li : route2_links_) v2 += static_cast<double>(rs.queues[static_cast<std::size_t>(li)].size());

        VmsMessage message = VmsMessage::NoDisplay;
        switch (vms.strategy) {
            case VmsStrategy::None:
                break;
            case VmsStrategy::Genuine:
                message = genuine_message_from_diff(v1 - v2, vms.bands);
                break;
            case VmsStrategy::Ldr:
                message = project_message(ldr_score(vms.policy, history, reference_),
                                          vms.policy.thresholds);
                break;
            case VmsStrategy::Scripted:
                message = vms.script[static_cast<std::size_t>(t)];
                break;
        }

        SignalPlan plan = signal.strategy == SignalStrategy::Ldr
                              ? ldr_splits(signal.policy, network_, history, reference_)
                              : fixed_plan;
        std::vector<double> greens =
            signal.strategy == SignalStrategy::Ldr ? link_greens(plan) : fixed_greens;

        inject_step(rs, day, t, message, vms, config);
        discharge_step(rs, t, greens);

        Vector snapshot(n_links_);
        long on_network = 0;
        for (int li = 0; li < n_links_; ++li) {
            auto n = rs.queues[static_cast<std::size_t>(li)].size();
            snapshot[li] = static_cast<double>(n);
            on_network += static_cast<long>(n);
        }

        out.decision_log.push_back(
            {t, message, plan, v1, v2, rs.injected, rs.completed, on_network});
        if (trace != nullptr) {
            *trace << t << "," << to_string(message) << "," << v1 << "," << v2;
            for (const Vector& g : plan.greens)
                for (Eigen::Index p = 0; p < g.size(); ++p) *trace << "," << g[p];
            for (int li = 0; li < n_links_; ++li) *trace << "," << snapshot[li];
            *trace << "\n";
        }
        history.push(std::move(snapshot));
    }

    out.total_agents = static_cast<int>(rs.agents.size());
    double total_steps = 0.0;
    for (const Agent& ag : rs.agents) {
        double steps;
        if (ag.exit_step >= 0) {
            ++out.completed_agents;
            steps = static_cast<double>(ag.exit_step - ag.entry_step);
        } else {
            // Still in the network at the end: charge the remaining horizon
            // plus one step so stranding is never cheaper than finishing.
            ++out.stranded_agents;
            steps = static_cast<double>(config.horizon - ag.entry_step + 1);
        }
        if (ag.counted) {
            ++out.counted_agents;
            out.per_agent_travel_steps.push_back(steps);
            total_steps += steps;
        }
    }
    if (out.counted_agents > 0)
        out.mean_travel_time_s = total_steps / out.counted_agents * config.step_seconds;
    out.agents = std::move(rs.agents);
    return out;
}

}  // namespace mesovms
