#pragma once

#include <map>
#include <string>
#include <vector>

#include "mesovms/types.hpp"

namespace mesovms {

/// Directed road link with an occupancy-based delay function
///   travel time (steps) = round(alpha * occupancy + beta), floored at 1.
struct Link {
    std::string id;
    std::string from_node;
    std::string to_node;
    double alpha = 0.0;           ///< delay slope, steps per vehicle
    double beta = 1.0;            ///< free-flow traversal, steps
    int capacity_per_step = 1;    ///< max vehicles discharged per step at full green
};

/// One (incoming link -> outgoing link) movement greened by a phase.
struct Movement {
    std::string in_link;
    std::string out_link;
};

struct Phase {
    std::vector<Movement> movements;
};

/// A junction with turning rules. One phase means an unsignalized,
/// always-green junction; two or more phases mean a signalized intersection
/// whose green split is set by a signal controller.
struct Intersection {
    std::string node;
    std::vector<Phase> phases;
    /// turning[in_link][out_link] = probability a background vehicle arriving
    /// on in_link continues onto out_link. Each inner map sums to 1.
    std::map<std::string, std::map<std::string, double>> turning;

    bool signalized() const { return phases.size() > 1; }
};

/// Ordered link sequence forming a connected path.
struct Route {
    std::string id;
    std::vector<std::string> links;
};

struct OdPair {
    std::string origin;
    std::string destination;

    friend bool operator==(const OdPair& a, const OdPair& b) {
        return a.origin == b.origin && a.destination == b.destination;
    }
    friend auto operator<=>(const OdPair& a, const OdPair& b) = default;
};

/// Where the VMS sits and whom it can influence.
struct VmsPlacement {
    std::vector<std::string> visible_from_links;
    std::vector<OdPair> influenced_od_pairs;
    std::string route1;
    std::string route2;
};

/// Immutable road network. Plain data; loaded once, shared read-only.
struct Network {
    std::vector<Link> links;
    std::vector<Intersection> intersections;
    std::vector<Route> routes;
    std::vector<OdPair> od_pairs;
    VmsPlacement vms;
    std::vector<std::string> zones;
    /// entry_links[zone][link] = weight for choosing that link when a vehicle
    /// enters the network at `zone` (weights need not be normalized).
    std::map<std::string, std::map<std::string, double>> entry_links;

    int signalized_count() const;
    /// Index into `links` for the given id, or -1.
    int link_index(const std::string& id) const;
    const Link* find_link(const std::string& id) const;
    const Route* find_route(const std::string& id) const;
};

struct ValidationIssue {
    std::string subject;   ///< offending identifier (link/route/intersection/zone)
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Checks every structural invariant; returns one issue per violation.
/// Pure: same network, same report.
ValidationReport validate(const Network& network);

/// Eq.-style link performance: round(alpha * occupancy + beta) steps,
/// at least 1. Throws ContractError on negative occupancy.
int link_travel_time(const Link& link, double occupancy);

/// Per-link reference occupancy (capacity_per_step * beta), used to
/// normalize state vectors before they enter a decision rule.
Vector reference_occupancy(const Network& network);

}  // namespace mesovms
