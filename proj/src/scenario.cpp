#include "mesovms/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mesovms/sha256.hpp"

namespace mesovms {

using nlohmann::json;

ComplianceProfile ScenarioBundle::profile(const std::string& profile_name) const {
    for (const auto& [n, listed] : compliance_profiles)
        if (n == profile_name) return ComplianceProfile::from_listed(listed);
    throw ConfigError("unknown compliance profile: " + profile_name);
}

namespace {

json network_to_json(const Network& net) {
    json j;
    j["links"] = json::array();
    for (const Link& l : net.links)
        j["links"].push_back({{"id", l.id},
                              {"from", l.from_node},
                              {"to", l.to_node},
                              {"alpha", l.alpha},
                              {"beta", l.beta},
                              {"capacity", l.capacity_per_step}});
    j["intersections"] = json::array();
    for (const Intersection& ix : net.intersections) {
        json phases = json::array();
        for (const Phase& ph : ix.phases) {
            json moves = json::array();
            for (const Movement& mv : ph.movements) moves.push_back({mv.in_link, mv.out_link});
            phases.push_back(std::move(moves));
        }
        json turning = json::object();
        for (const auto& [in_id, outs] : ix.turning) {
            json row = json::object();
            for (const auto& [out_id, p] : outs) row[out_id] = p;
            turning[in_id] = std::move(row);
        }
        j["intersections"].push_back(
            {{"node", ix.node}, {"phases", std::move(phases)}, {"turning", std::move(turning)}});
    }
    j["routes"] = json::array();
    for (const Route& r : net.routes) j["routes"].push_back({{"id", r.id}, {"links", r.links}});
    j["od_pairs"] = json::array();
    for (const OdPair& od : net.od_pairs) j["od_pairs"].push_back({od.origin, od.destination});
    json influenced = json::array();
    for (const OdPair& od : net.vms.influenced_od_pairs)
        influenced.push_back({od.origin, od.destination});
    j["vms"] = {{"visible_from_links", net.vms.visible_from_links},
                {"influenced_od_pairs", std::move(influenced)},
                {"route1", net.vms.route1},
                {"route2", net.vms.route2}};
    j["zones"] = net.zones;
    json entries = json::object();
    for (const auto& [zone, weights] : net.entry_links) {
        json row = json::object();
        for (const auto& [id, w] : weights) row[id] = w;
        entries[zone] = std::move(row);
    }
    j["entry_links"] = std::move(entries);
    return j;
}

Network network_from_json(const json& j) {
    Network net;
    for (const json& l : j.at("links")) {
        Link link;
        link.id = l.at("id").get<std::string>();
        link.from_node = l.at("from").get<std::string>();
        link.to_node = l.at("to").get<std::string>();
        link.alpha = l.at("alpha").get<double>();
        link.beta = l.at("beta").get<double>();
        link.capacity_per_step = l.at("capacity").get<int>();
        net.links.push_back(std::move(link));
    }
    for (const json& i : j.at("intersections")) {
        Intersection ix;
        ix.node = i.at("node").get<std::string>();
        for (const json& ph : i.at("phases")) {
            Phase phase;
            for (const json& mv : ph)
                phase.movements.push_back(
                    {mv.at(0).get<std::string>(), mv.at(1).get<std::string>()});
            ix.phases.push_back(std::move(phase));
        }
        for (const auto& [in_id, outs] : i.at("turning").items())
            for (const auto& [out_id, p] : outs.items())
                ix.turning[in_id][out_id] = p.get<double>();
        net.intersections.push_back(std::move(ix));
    }
    for (const json& r : j.at("routes"))
        net.routes.push_back({r.at("id").get<std::string>(),
                              r.at("links").get<std::vector<std::string>>()});
    for (const json& od : j.at("od_pairs"))
        net.od_pairs.push_back({od.at(0).get<std::string>(), od.at(1).get<std::string>()});
    const json& vms = j.at("vms");
    net.vms.visible_from_links = vms.at("visible_from_links").get<std::vector<std::string>>();
    for (const json& od : vms.at("influenced_od_pairs"))
        net.vms.influenced_od_pairs.push_back(
            {od.at(0).get<std::string>(), od.at(1).get<std::string>()});
    net.vms.route1 = vms.at("route1").get<std::string>();
    net.vms.route2 = vms.at("route2").get<std::string>();
    net.zones = j.at("zones").get<std::vector<std::string>>();
    for (const auto& [zone, row] : j.at("entry_links").items())
        for (const auto& [id, w] : row.items()) net.entry_links[zone][id] = w.get<double>();
    return net;
}

json day_to_json(const DemandDay& day) {
    json origins = json::object();
    for (const auto& [zone, counts] : day.origins) origins[zone] = counts;
    return {{"label", day.label}, {"provenance", day.provenance}, {"origins", std::move(origins)}};
}

DemandDay day_from_json(const json& j) {
    DemandDay day;
    day.label = j.at("label").get<std::string>();
    day.provenance = j.at("provenance").get<std::string>();
    for (const auto& [zone, counts] : j.at("origins").items())
        day.origins[zone] = counts.get<std::vector<int>>();
    return day;
}

void check_bundle(const ScenarioBundle& b) {
    ValidationReport report = validate(b.network);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "scenario network fails validation:";
        for (const ValidationIssue& issue : report.issues)
            msg << "\n  " << issue.subject << ": " << issue.message;
        throw DataError(msg.str());
    }
    for (const auto& [name, listed] : b.compliance_profiles) {
        try {
            ComplianceProfile::from_listed(listed);
        } catch (const ConfigError& e) {
            throw DataError("compliance profile " + name + ": " + e.what());
        }
    }
    bool found = false;
    for (const auto& [name, listed] : b.compliance_profiles)
        if (name == b.default_profile) found = true;
    if (!found) throw DataError("default compliance profile " + b.default_profile + " not defined");
    if (b.sim.horizon < 1) throw DataError("scenario horizon must be at least 1 step");
    if (b.sim.step_seconds <= 0.0) throw DataError("scenario step length must be positive");
    if (b.sim.warmup_steps < 0 || b.sim.warmup_steps > b.sim.horizon)
        throw DataError("scenario warm-up must lie within the horizon");
    if (b.sim.target_share < 0.0) throw DataError("scenario influenced share must be >= 0");

    std::set<std::string> zones(b.network.zones.begin(), b.network.zones.end());
    std::set<std::string> train_labels;
    for (const DemandDay& day : b.train_days) train_labels.insert(day.label);
    auto check_days = [&](const std::vector<DemandDay>& days, const char* which) {
        for (const DemandDay& day : days) {
            std::size_t len = 0;
            bool first = true;
            for (const auto& [zone, counts] : day.origins) {
                if (!zones.count(zone))
                    throw DataError("demand day " + day.label + " references unknown zone " + zone);
                if (first) {
                    len = counts.size();
                    first = false;
                } else if (counts.size() != len) {
                    throw DataError("demand day " + day.label + " has origins of unequal length");
                }
                for (int c : counts)
                    if (c < 0)
                        throw DataError("demand day " + day.label + " has a negative count at " +
                                        zone);
            }
            if (std::string(which) == "test" && train_labels.count(day.label))
                throw DataError("day label " + day.label + " appears in both train and test sets");
        }
    };
    check_days(b.train_days, "train");
    check_days(b.test_days, "test");
}

}  // namespace

std::string scenario_to_json(const ScenarioBundle& bundle) {
    json j;
    j["format_version"] = kScenarioFormatVersion;
    j["kind"] = "mesovms-scenario";
    j["name"] = bundle.name;
    j["description"] = bundle.description;
    j["network"] = network_to_json(bundle.network);
    json profiles = json::object();
    for (const auto& [name, listed] : bundle.compliance_profiles) profiles[name] = listed;
    j["compliance_profiles"] = std::move(profiles);
    j["default_profile"] = bundle.default_profile;
    j["sim"] = {{"horizon", bundle.sim.horizon},
                {"step_seconds", bundle.sim.step_seconds},
                {"warmup_steps", bundle.sim.warmup_steps},
                {"target_share", bundle.sim.target_share}};
    j["genuine_bands"] = {{"near", bundle.genuine_bands.near}, {"far", bundle.genuine_bands.far}};
    json days;
    days["train"] = json::array();
    for (const DemandDay& d : bundle.train_days) days["train"].push_back(day_to_json(d));
    days["test"] = json::array();
    for (const DemandDay& d : bundle.test_days) days["test"].push_back(day_to_json(d));
    j["demand_days"] = std::move(days);
    return j.dump(2) + "\n";
}

ScenarioBundle scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError("scenario parse error at byte " + std::to_string(e.byte) + ": " +
                        e.what());
    }
    ScenarioBundle b;
    try {
        if (j.at("kind").get<std::string>() != "mesovms-scenario")
            throw DataError("not a scenario file (kind mismatch)");
        int version = j.at("format_version").get<int>();
        if (version != kScenarioFormatVersion)
            throw DataError("unsupported scenario format_version " + std::to_string(version) +
                            " (expected " + std::to_string(kScenarioFormatVersion) + ")");
        b.name = j.at("name").get<std::string>();
        b.description = j.at("description").get<std::string>();
        b.network = network_from_json(j.at("network"));
        for (const auto& [name, arr] : j.at("compliance_profiles").items())
            b.compliance_profiles.emplace_back(name, arr.get<std::array<double, 5>>());
        b.default_profile = j.at("default_profile").get<std::string>();
        const json& sim = j.at("sim");
        b.sim.horizon = sim.at("horizon").get<int>();
        b.sim.step_seconds = sim.at("step_seconds").get<double>();
        b.sim.warmup_steps = sim.at("warmup_steps").get<int>();
        b.sim.target_share = sim.at("target_share").get<double>();
        b.genuine_bands.near = j.at("genuine_bands").at("near").get<double>();
        b.genuine_bands.far = j.at("genuine_bands").at("far").get<double>();
        for (const json& d : j.at("demand_days").at("train"))
            b.train_days.push_back(day_from_json(d));
        for (const json& d : j.at("demand_days").at("test"))
            b.test_days.push_back(day_from_json(d));
    } catch (const json::exception& e) {
        throw DataError(std::string("scenario: malformed field: ") + e.what());
    }
    check_bundle(b);
    return b;
}

ScenarioBundle load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

void save_scenario(const ScenarioBundle& bundle, const std::string& path) {
    std::string text = scenario_to_json(bundle);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write scenario file " + path);
    out << text;
}

Network builtin_network() {
    Network net;
    struct Row {
        const char* id;
        const char* from;
        const char* to;
        double alpha;
        double beta;
        int cap;
    };
    // Route 1 (A-I1-I3-B) is shorter but tighter; Route 2 (A-I2-I4-B) is
    // longer in free flow with more capacity and a flatter delay slope, so
    // the better split shifts with congestion.
    const Row rows[] = {
        {"1", "A", "I1", 0.05, 2.0, 40},  {"2", "c", "I3", 0.05, 2.0, 20},
        {"3", "I1", "I3", 0.03, 2.0, 44}, {"4", "I3", "I1", 0.05, 2.0, 20},
        {"5", "I3", "B", 0.03, 2.0, 44},  {"6", "I3", "c", 0.02, 2.0, 30},
        {"7", "a", "A", 0.02, 1.0, 60},   {"8", "B", "e", 0.01, 1.0, 60},
        {"9", "A", "I2", 0.04, 3.0, 60},  {"10", "d", "I2", 0.05, 2.0, 20},
        {"11", "I2", "I4", 0.02, 3.0, 60}, {"12", "I4", "I2", 0.05, 2.0, 20},
        {"13", "b", "A", 0.02, 1.0, 60},  {"14", "B", "f", 0.01, 1.0, 60},
        {"15", "I4", "B", 0.02, 2.0, 60}, {"16", "I2", "d", 0.02, 2.0, 30},
        {"17", "c", "I1", 0.05, 2.0, 20}, {"18", "I1", "c", 0.02, 2.0, 30},
        {"19", "d", "I4", 0.05, 2.0, 20}, {"20", "I4", "d", 0.02, 2.0, 30},
        {"21", "I1", "I2", 0.05, 2.0, 20}, {"22", "I2", "I1", 0.05, 2.0, 20},
        {"23", "I3", "I4", 0.05, 2.0, 20}, {"24", "I4", "I3", 0.05, 2.0, 20},
    };
    for (const Row& r : rows) net.links.push_back({r.id, r.from, r.to, r.alpha, r.beta, r.cap});

    auto phase = [](std::vector<Movement> moves) {
        Phase p;
        p.movements = std::move(moves);
        return p;
    };

    Intersection i1;
    i1.node = "I1";
    i1.phases = {phase({{"1", "3"}, {"1", "21"}, {"1", "18"}}),
                 phase({{"4", "18"}, {"4", "21"}}),
                 phase({{"22", "3"}, {"22", "18"}}),
                 phase({{"17", "3"}, {"17", "21"}})};
    i1.turning = {{"1", {{"3", 0.7}, {"21", 0.15}, {"18", 0.15}}},
                  {"4", {{"18", 0.6}, {"21", 0.4}}},
                  {"22", {{"3", 0.6}, {"18", 0.4}}},
                  {"17", {{"3", 0.6}, {"21", 0.4}}}};

    Intersection i2;
    i2.node = "I2";
    i2.phases = {phase({{"9", "11"}, {"9", "22"}, {"9", "16"}}),
                 phase({{"12", "16"}, {"12", "22"}}),
                 phase({{"21", "11"}, {"21", "16"}}),
                 phase({{"10", "11"}, {"10", "22"}})};
    i2.turning = {{"9", {{"11", 0.7}, {"22", 0.15}, {"16", 0.15}}},
                  {"12", {{"16", 0.6}, {"22", 0.4}}},
                  {"21", {{"11", 0.6}, {"16", 0.4}}},
                  {"10", {{"11", 0.6}, {"22", 0.4}}}};

    Intersection i3;
    i3.node = "I3";
    i3.phases = {phase({{"3", "5"}}),
                 phase({{"3", "23"}, {"3", "6"}}),
                 phase({{"24", "5"}, {"24", "6"}}),
                 phase({{"2", "5"}, {"2", "23"}, {"2", "4"}})};
    i3.turning = {{"3", {{"5", 0.7}, {"23", 0.15}, {"6", 0.15}}},
                  {"24", {{"5", 0.6}, {"6", 0.4}}},
                  {"2", {{"5", 0.5}, {"23", 0.3}, {"4", 0.2}}}};

    Intersection i4;
    i4.node = "I4";
    i4.phases = {phase({{"11", "15"}}),
                 phase({{"11", "24"}, {"11", "20"}}),
                 phase({{"23", "15"}, {"23", "20"}}),
                 phase({{"19", "15"}, {"19", "24"}, {"19", "12"}})};
    i4.turning = {{"11", {{"15", 0.7}, {"24", 0.15}, {"20", 0.15}}},
                  {"23", {{"15", 0.6}, {"20", 0.4}}},
                  {"19", {{"15", 0.5}, {"24", 0.3}, {"12", 0.2}}}};

    Intersection fork;
    fork.node = "A";
    fork.phases = {phase({{"7", "1"}, {"7", "9"}, {"13", "1"}, {"13", "9"}})};
    fork.turning = {{"7", {{"1", 0.5}, {"9", 0.5}}}, {"13", {{"1", 0.5}, {"9", 0.5}}}};

    Intersection merge;
    merge.node = "B";
    merge.phases = {phase({{"5", "8"}, {"5", "14"}, {"15", "8"}, {"15", "14"}})};
    merge.turning = {{"5", {{"8", 0.5}, {"14", 0.5}}}, {"15", {{"8", 0.5}, {"14", 0.5}}}};

    net.intersections = {i1, i2, i3, i4, fork, merge};
    net.routes = {{"route1", {"1", "3", "5"}}, {"route2", {"9", "11", "15"}}};
    net.od_pairs = {{"a", "e"}, {"a", "f"}, {"b", "e"}, {"b", "f"}};
    net.vms.visible_from_links = {"7", "13"};
    net.vms.influenced_od_pairs = net.od_pairs;
    net.vms.route1 = "route1";
    net.vms.route2 = "route2";
    net.zones = {"a", "b", "c", "d", "e", "f"};
    net.entry_links = {{"a", {{"7", 1.0}}},
                       {"b", {{"13", 1.0}}},
                       {"c", {{"17", 0.5}, {"2", 0.5}}},
                       {"d", {{"19", 0.5}, {"10", 0.5}}}};
    return net;
}

DemandModel builtin_demand_model(double sigma) {
    const int horizon = 60;
    // Arrivals stop at minute 45 so the network can drain before the horizon;
    // vehicles cut off mid-trip would otherwise distort the travel time mean.
    const int active = 45;
    DemandModel model;
    model.sigma = sigma;
    auto bump = [&](double lo, double hi) {
        std::vector<double> rates(horizon, 0.0);
        for (int t = 0; t < active; ++t) {
            double s = std::sin(M_PI * (t + 0.5) / active);
            rates[static_cast<std::size_t>(t)] = lo + (hi - lo) * s * s;
        }
        return rates;
    };
    model.base_rates["a"] = bump(1.5, 6.5);
    model.base_rates["b"] = bump(1.0, 5.5);
    model.base_rates["c"] = bump(0.8, 3.0);
    model.base_rates["d"] = bump(0.8, 3.0);
    return model;
}

std::string demand_days_fingerprint(const std::vector<DemandDay>& days) {
    json arr = json::array();
    for (const DemandDay& d : days) arr.push_back(day_to_json(d));
    return sha256_hex(arr.dump(2));
}

ScenarioBundle builtin_scenario(int n_days, double sigma, std::uint64_t seed) {
    if (n_days < 1) throw ConfigError("need at least one demand day");
    ScenarioBundle b;
    b.name = "haining-synthetic";
    b.description =
        "Synthetic two-route VMS scenario. Topology, link parameters and all "
        "demand are invented; no measured data is included.";
    b.network = builtin_network();
    b.compliance_profiles = {{"low", {0.3, 0.4, 0.5, 0.6, 0.7}},
                             {"mid", {0.2, 0.4, 0.5, 0.6, 0.8}},
                             {"high", {0.1, 0.3, 0.5, 0.7, 0.9}}};
    b.default_profile = "high";
    b.sim.horizon = 60;
    b.sim.step_seconds = 60.0;
    b.sim.warmup_steps = 5;
    b.sim.target_share = 0.8;
    b.genuine_bands = GenuineBands{10.0, 30.0};

    std::vector<DemandDay> days =
        synthesize_days(builtin_demand_model(sigma), n_days, b.sim.horizon, seed);
    int n_train = (n_days + 1) / 2;
    b.train_days.assign(days.begin(), days.begin() + n_train);
    b.test_days.assign(days.begin() + n_train, days.end());
    return b;
}

}  // namespace mesovms
