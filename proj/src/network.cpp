#include "mesovms/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mesovms {

int Network::signalized_count() const {
    int n = 0;
    for (const auto& x : intersections)
        if (x.signalized()) ++n;
    return n;
}

int Network::link_index(const std::string& id) const {
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i].id == id) return static_cast<int>(i);
    return -1;
}

const Link* Network::find_link(const std::string& id) const {
    int i = link_index(id);
    return i < 0 ? nullptr : &links[i];
}

const Route* Network::find_route(const std::string& id) const {
    for (const auto& r : routes)
        if (r.id == id) return &r;
    return nullptr;
}

int link_travel_time(const Link& link, double occupancy) {
    if (occupancy < 0.0)
        throw ContractError("link_travel_time: negative occupancy on link " + link.id);
    double steps = std::floor(link.alpha * occupancy + link.beta + 0.5);  // half-up
    return std::max(1, static_cast<int>(steps));
}

Vector reference_occupancy(const Network& network) {
    Vector ref(static_cast<Eigen::Index>(network.links.size()));
    for (std::size_t i = 0; i < network.links.size(); ++i)
        ref[static_cast<Eigen::Index>(i)] =
            std::max(1.0, network.links[i].capacity_per_step * network.links[i].beta);
    return ref;
}

namespace {

void check_links(const Network& net, ValidationReport& report) {
    std::set<std::string> seen;
    for (const auto& link : net.links) {
        if (!seen.insert(link.id).second)
            report.issues.push_back({link.id, "duplicate link id"});
        if (link.alpha < 0.0)
            report.issues.push_back({link.id, "alpha must be >= 0"});
        if (link.beta < 1.0)
            report.issues.push_back({link.id, "beta must be >= 1 step"});
        if (link.capacity_per_step < 1)
            report.issues.push_back({link.id, "capacity_per_step must be >= 1"});
        if (link.from_node.empty() || link.to_node.empty())
            report.issues.push_back({link.id, "missing endpoint node"});
    }
}

void check_intersections(const Network& net, ValidationReport& report) {
    std::set<std::string> nodes_seen;
    for (const auto& inter : net.intersections) {
        if (!nodes_seen.insert(inter.node).second)
            report.issues.push_back({inter.node, "duplicate intersection record"});
        if (inter.phases.empty())
            report.issues.push_back({inter.node, "intersection has no phases"});

        std::set<std::string> incoming, outgoing;
        for (const auto& link : net.links) {
            if (link.to_node == inter.node) incoming.insert(link.id);
            if (link.from_node == inter.node) outgoing.insert(link.id);
        }
        if (incoming.empty() && outgoing.empty())
            report.issues.push_back({inter.node, "intersection node touches no link"});

        for (const auto& phase : inter.phases)
            for (const auto& m : phase.movements) {
                if (!incoming.count(m.in_link))
                    report.issues.push_back(
                        {inter.node, "phase movement from non-incoming link " + m.in_link});
                if (!outgoing.count(m.out_link))
                    report.issues.push_back(
                        {inter.node, "phase movement to non-outgoing link " + m.out_link});
            }

        // Which movements ever get green.
        std::set<std::pair<std::string, std::string>> greened;
        for (const auto& phase : inter.phases)
            for (const auto& m : phase.movements) greened.insert({m.in_link, m.out_link});

        for (const auto& [in_link, probs] : inter.turning) {
            if (!incoming.count(in_link)) {
                report.issues.push_back(
                    {inter.node, "turning rule for non-incoming link " + in_link});
                continue;
            }
            double total = 0.0;
            for (const auto& [out_link, p] : probs) {
                total += p;
                if (p < 0.0)
                    report.issues.push_back(
                        {inter.node, "negative turning probability " + in_link + "->" + out_link});
                if (!outgoing.count(out_link))
                    report.issues.push_back(
                        {inter.node, "turning to non-outgoing link " + out_link});
                else if (p > 0.0 && !greened.count({in_link, out_link}))
                    report.issues.push_back(
                        {inter.node,
                         "movement " + in_link + "->" + out_link + " is never greened"});
            }
            if (std::abs(total - 1.0) > 1e-9)
                report.issues.push_back(
                    {inter.node, "turning probabilities for link " + in_link +
                                     " sum to " + std::to_string(total)});
        }

        // Every incoming link needs a turning rule or background traffic strands.
        for (const auto& in_link : incoming)
            if (!inter.turning.count(in_link))
                report.issues.push_back(
                    {inter.node, "incoming link " + in_link + " has no turning rule"});
    }
}

void check_routes(const Network& net, ValidationReport& report) {
    for (const auto& route : net.routes) {
        if (route.links.empty()) {
            report.issues.push_back({route.id, "route has no links"});
            continue;
        }
        std::set<std::string> used;
        const Link* prev = nullptr;
        for (const auto& id : route.links) {
            const Link* link = net.find_link(id);
            if (!link) {
                report.issues.push_back({route.id, "route references unknown link " + id});
                prev = nullptr;
                continue;
            }
            if (!used.insert(id).second)
                report.issues.push_back({route.id, "route repeats link " + id});
            if (prev && prev->to_node != link->from_node)
                report.issues.push_back(
                    {route.id, "links " + prev->id + " and " + id + " do not connect"});
            prev = link;
        }
    }
}

void check_zones_and_vms(const Network& net, ValidationReport& report) {
    std::set<std::string> zones(net.zones.begin(), net.zones.end());
    for (const auto& od : net.od_pairs) {
        if (!zones.count(od.origin))
            report.issues.push_back({od.origin, "od pair references unknown origin zone"});
        if (!zones.count(od.destination))
            report.issues.push_back({od.destination, "od pair references unknown destination zone"});
    }

    for (const auto& [zone, weights] : net.entry_links) {
        if (!zones.count(zone))
            report.issues.push_back({zone, "entry links declared for unknown zone"});
        double total = 0.0;
        for (const auto& [id, w] : weights) {
            const Link* link = net.find_link(id);
            if (!link) {
                report.issues.push_back({zone, "entry link " + id + " does not exist"});
                continue;
            }
            if (link->from_node != zone)
                report.issues.push_back({zone, "entry link " + id + " does not start at zone"});
            if (w < 0.0) report.issues.push_back({zone, "negative entry weight on link " + id});
            total += w;
        }
        if (total <= 0.0)
            report.issues.push_back({zone, "entry link weights sum to zero"});
    }

    const auto& vms = net.vms;
    for (const auto& id : vms.visible_from_links)
        if (!net.find_link(id))
            report.issues.push_back({id, "vms visible_from link does not exist"});
    for (const auto& od : vms.influenced_od_pairs)
        if (std::find(net.od_pairs.begin(), net.od_pairs.end(), od) == net.od_pairs.end())
            report.issues.push_back(
                {od.origin + "-" + od.destination, "influenced od pair not in network od pairs"});
    if (!vms.route1.empty() && !net.find_route(vms.route1))
        report.issues.push_back({vms.route1, "vms route does not exist"});
    if (!vms.route2.empty() && !net.find_route(vms.route2))
        report.issues.push_back({vms.route2, "vms route does not exist"});
}

void check_forks(const Network& net, ValidationReport& report) {
    // A non-zone node where traffic arrives and can leave on more than one
    // link needs turning rules, i.e. an intersection record.
    std::set<std::string> zones(net.zones.begin(), net.zones.end());
    std::set<std::string> with_record;
    for (const auto& inter : net.intersections) with_record.insert(inter.node);

    std::map<std::string, int> in_count, out_count;
    for (const auto& link : net.links) {
        ++in_count[link.to_node];
        ++out_count[link.from_node];
    }
    for (const auto& [node, n_out] : out_count) {
        if (zones.count(node) || with_record.count(node)) continue;
        if (n_out > 1 && in_count.count(node))
            report.issues.push_back(
                {node, "node forks without turning rules (no intersection record)"});
    }
}

}  // namespace

ValidationReport validate(const Network& network) {
    ValidationReport report;
    check_links(network, report);
    check_intersections(network, report);
    check_routes(network, report);
    check_zones_and_vms(network, report);
    check_forks(network, report);
    return report;
}

}  // namespace mesovms
