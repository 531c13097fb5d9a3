#include "mesovms/commands.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "mesovms/policy_io.hpp"
#include "mesovms/scenario.hpp"
#include "mesovms/trainer.hpp"

namespace mesovms {

namespace {

VmsStrategy parse_vms(const std::string& s) {
    if (s == "ldr") return VmsStrategy::Ldr;
    if (s == "genuine") return VmsStrategy::Genuine;
    if (s == "none") return VmsStrategy::None;
    throw ConfigError("unknown vms strategy '" + s + "' (expected ldr, genuine or none)");
}

SignalStrategy parse_signal(const std::string& s) {
    if (s == "ldr") return SignalStrategy::Ldr;
    if (s == "default") return SignalStrategy::FixedEqual;
    throw ConfigError("unknown signal strategy '" + s + "' (expected ldr or default)");
}

/// Accepts a profile name from the scenario or an explicit listed vector
/// "c1,c2,c3,c4,c5" (strongest Route-2 advice first).
ComplianceProfile parse_compliance(const ScenarioBundle& scenario, const std::string& text) {
    if (text.empty()) return scenario.default_compliance();
    if (text.find(',') == std::string::npos) return scenario.profile(text);
    std::array<double, 5> listed{};
    std::istringstream in(text);
    for (int i = 0; i < 5; ++i) {
        std::string piece;
        if (!std::getline(in, piece, ','))
            throw ConfigError("compliance must list exactly 5 values: " + text);
        try {
            listed[static_cast<std::size_t>(i)] = std::stod(piece);
        } catch (const std::exception&) {
            throw ConfigError("compliance value '" + piece + "' is not a number");
        }
    }
    std::string leftover;
    if (in >> leftover) throw ConfigError("compliance must list exactly 5 values: " + text);
    return ComplianceProfile::from_listed(listed);
}

std::string strategy_label(VmsStrategy vms, SignalStrategy signal) {
    std::string v = vms == VmsStrategy::Ldr ? "ldr" : (vms == VmsStrategy::Genuine ? "genuine" : "none");
    return v + "+" + (signal == SignalStrategy::Ldr ? "coordinated" : "default");
}

struct EvalSetup {
    VmsControllerSpec vms;
    SignalControllerSpec signal;
    std::string label;
};

/// Builds controller specs from explicit strategy names plus an optional
/// policy record; refuses when an LDR side has no trained segment.
EvalSetup make_setup(const ScenarioBundle& scenario, VmsStrategy vms_strategy,
                     SignalStrategy signal_strategy, const PolicyRecord* record,
                     const ComplianceProfile& profile) {
    EvalSetup setup{
        VmsControllerSpec{}, SignalControllerSpec{}, strategy_label(vms_strategy, signal_strategy)};
    setup.vms.strategy = vms_strategy;
    setup.vms.profile = profile;
    setup.vms.bands = scenario.genuine_bands;
    setup.signal.strategy = signal_strategy;
    if (vms_strategy == VmsStrategy::Ldr) {
        if (record == nullptr || !record->vms)
            throw ConfigError("vms ldr selected but the policy record has no vms segment");
        setup.vms.policy = *record->vms;
    }
    if (signal_strategy == SignalStrategy::Ldr) {
        if (record == nullptr || !record->signal)
            throw ConfigError("signal ldr selected but the policy record has no signal segment");
        setup.signal.policy = *record->signal;
    }
    return setup;
}

struct DayResult {
    std::optional<double> phi;
    double completed = 0.0;
    double counted = 0.0;
    double stranded = 0.0;
};

/// Mean over `replications` runs of one day; seeds derive from
/// (seed, day_index, rep) so every strategy sees the same streams.
DayResult evaluate_day(const Simulator& simulator, const ScenarioBundle& scenario,
                       const EvalSetup& setup, const DemandDay& day, std::size_t day_index,
                       std::uint64_t seed, int replications,
                       std::vector<DecisionRecord>* first_rep_log = nullptr) {
    DayResult out;
    double phi_total = 0.0;
    int phi_count = 0;
    for (int r = 0; r < replications; ++r) {
        SimConfig cfg = scenario.sim;
        cfg.rng_seed = derive_seed(seed, day_index, static_cast<std::uint64_t>(r));
        SimResult result = simulator.run(day, setup.vms, setup.signal, cfg);
        if (result.mean_travel_time_s) {
            phi_total += *result.mean_travel_time_s;
            ++phi_count;
        }
        out.completed += result.completed_agents;
        out.counted += result.counted_agents;
        out.stranded += result.stranded_agents;
        if (r == 0 && first_rep_log != nullptr) *first_rep_log = result.decision_log;
    }
    if (phi_count > 0) out.phi = phi_total / phi_count;
    out.completed /= replications;
    out.counted /= replications;
    out.stranded /= replications;
    return out;
}

std::string csv_number(double v) { return format_double(v); }

}  // namespace

int cmd_synth(const SynthOptions& options, std::ostream& log) {
    if (options.days < 1) throw ConfigError("--days must be at least 1");
    if (options.sigma < 0.0) throw ConfigError("--sigma must be >= 0");
    if (options.out.empty()) throw ConfigError("--out is required");
    ScenarioBundle bundle = builtin_scenario(options.days, options.sigma, options.seed);
    save_scenario(bundle, options.out);
    log << "wrote scenario " << bundle.name << " with " << bundle.train_days.size()
        << " train and " << bundle.test_days.size() << " test days to " << options.out << "\n";
    return 0;
}

int cmd_train(const TrainCliOptions& options, std::ostream& log) {
    if (options.out.empty()) throw ConfigError("--out is required");
    ScenarioBundle scenario = load_scenario(options.scenario);
    StrategySelection selection{parse_vms(options.vms), parse_signal(options.signal)};
    ComplianceProfile profile = parse_compliance(scenario, options.compliance);
    TrainingSet training{scenario.train_days, options.replications};
    PsoConfig pso;
    pso.particle_count = options.particles;
    pso.max_iterations = options.iterations;
    pso.rng_seed = options.seed;
    TrainOutcome outcome = train(scenario, selection, training, pso, options.delta, profile,
                                 !options.freeze_thresholds);
    save_policy(outcome.policy, options.out);
    std::ofstream report(options.out + ".report", std::ios::binary);
    if (!report) throw DataError("cannot write report next to " + options.out);
    report << outcome.report;
    log << "trained " << strategy_label(selection.vms, selection.signal) << ": objective "
        << format_double(outcome.best_value) << " s (baseline "
        << format_double(outcome.baseline_value) << " s) after " << outcome.evaluations
        << " evaluations in " << outcome.wall_seconds << " s\n";
    log << "policy written to " << options.out << "\n";
    return 0;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& log) {
    if (options.out.empty()) throw ConfigError("--out is required");
    if (options.replications < 1) throw ConfigError("--replications must be >= 1");
    ScenarioBundle scenario = load_scenario(options.scenario);
    VmsStrategy vms_strategy = parse_vms(options.vms);
    SignalStrategy signal_strategy = parse_signal(options.signal);
    ComplianceProfile profile = parse_compliance(scenario, options.compliance);
    std::optional<PolicyRecord> record;
    if (vms_strategy == VmsStrategy::Ldr || signal_strategy == SignalStrategy::Ldr) {
        if (options.policy.empty())
            throw ConfigError("--policy is required when an ldr strategy is selected");
        record = load_policy(options.policy);
    }
    EvalSetup setup = make_setup(scenario, vms_strategy, signal_strategy,
                                 record ? &*record : nullptr, profile);
    if (scenario.test_days.empty()) throw DataError("scenario has no test days");

    Simulator simulator(scenario.network);
    std::ostringstream csv;
    csv << "day,strategy,compliance,mean_travel_time_s,completed,counted,stranded\n";
    double phi_sum = 0.0;
    int phi_days = 0;
    for (std::size_t i = 0; i < scenario.test_days.size(); ++i) {
        const DemandDay& day = scenario.test_days[i];
        DayResult r = evaluate_day(simulator, scenario, setup, day, i, options.seed,
                                   options.replications);
        csv << day.label << "," << setup.label << "," << profile.listed_string() << ",";
        if (r.phi) {
            csv << csv_number(*r.phi);
            phi_sum += *r.phi;
            ++phi_days;
        } else {
            csv << "na";
        }
        csv << "," << csv_number(r.completed) << "," << csv_number(r.counted) << ","
            << csv_number(r.stranded) << "\n";
    }
    csv << "mean," << setup.label << "," << profile.listed_string() << ",";
    if (phi_days > 0)
        csv << csv_number(phi_sum / phi_days);
    else
        csv << "na";
    csv << ",,,\n";

    std::ofstream out(options.out, std::ios::binary);
    if (!out) throw DataError("cannot write " + options.out);
    out << csv.str();
    log << "evaluated " << setup.label << " on " << scenario.test_days.size() << " days -> "
        << options.out << "\n";
    return 0;
}

int cmd_compare(const CompareOptions& options, std::ostream& log) {
    if (options.compliances.empty())
        throw ConfigError("empty compliance sweep: pass at least one --compliance");
    if (options.out_dir.empty()) throw ConfigError("--out is required");
    if (options.replications < 1) throw ConfigError("--replications must be >= 1");
    ScenarioBundle scenario = load_scenario(options.scenario);
    if (scenario.test_days.empty()) throw DataError("scenario has no test days");

    // genuine+default needs no policy; each record contributes the strategy
    // its segments imply (vms only, signal only, or both).
    struct Entry {
        VmsStrategy vms;
        SignalStrategy signal;
        std::optional<PolicyRecord> record;
    };
    std::vector<Entry> entries;
    entries.push_back({VmsStrategy::Genuine, SignalStrategy::FixedEqual, std::nullopt});
    for (const std::string& path : options.policies) {
        PolicyRecord record = load_policy(path);
        VmsStrategy v = record.vms ? VmsStrategy::Ldr : VmsStrategy::Genuine;
        SignalStrategy s = record.signal ? SignalStrategy::Ldr : SignalStrategy::FixedEqual;
        for (const Entry& e : entries)
            if (e.vms == v && e.signal == s)
                throw ConfigError("policy " + path + " duplicates strategy " +
                                  strategy_label(v, s));
        entries.push_back({v, s, std::move(record)});
    }

    std::vector<ComplianceProfile> profiles;
    for (const std::string& text : options.compliances)
        profiles.push_back(parse_compliance(scenario, text));

    Simulator simulator(scenario.network);
    std::filesystem::create_directories(options.out_dir);

    std::ostringstream table;
    table << "strategy";
    for (const ComplianceProfile& p : profiles) table << "," << p.listed_string();
    table << "\n";
    std::ostringstream volume_log;
    volume_log << "strategy,compliance,day,step,message,v_route1,v_route2,diff\n";

    for (const Entry& entry : entries) {
        table << strategy_label(entry.vms, entry.signal);
        for (const ComplianceProfile& profile : profiles) {
            EvalSetup setup = make_setup(scenario, entry.vms, entry.signal,
                                         entry.record ? &*entry.record : nullptr, profile);
            double phi_sum = 0.0;
            int phi_days = 0;
            for (std::size_t i = 0; i < scenario.test_days.size(); ++i) {
                const DemandDay& day = scenario.test_days[i];
                std::vector<DecisionRecord> decisions;
                DayResult r = evaluate_day(simulator, scenario, setup, day, i, options.seed,
                                           options.replications, &decisions);
                if (r.phi) {
                    phi_sum += *r.phi;
                    ++phi_days;
                }
                for (const DecisionRecord& d : decisions)
                    volume_log << setup.label << "," << profile.listed_string() << ","
                               << day.label << "," << d.step << "," << to_string(d.message)
                               << "," << csv_number(d.v_route1) << ","
                               << csv_number(d.v_route2) << ","
                               << csv_number(d.v_route1 - d.v_route2) << "\n";
            }
            table << ",";
            if (phi_days > 0)
                table << csv_number(phi_sum / phi_days);
            else
                table << "na";
        }
        table << "\n";
    }

    auto write_file = [&](const std::string& name, const std::string& content) {
        std::string path = (std::filesystem::path(options.out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path);
        out << content;
        log << "wrote " << path << "\n";
    };
    write_file("table2.csv", table.str());
    write_file("message_volume_log.csv", volume_log.str());
    return 0;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mesovms
