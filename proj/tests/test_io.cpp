// Serialization round trips, the command layer, and the CLI binary itself.
// Scenario and policy files are canonical: saving what was loaded must
// reproduce the input byte for byte, which is what makes repeated commands
// byte-identical.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mesovms/commands.hpp"
#include "mesovms/policy_io.hpp"
#include "mesovms/scenario.hpp"
#include "mesovms/trainer.hpp"

using namespace mesovms;
namespace fs = std::filesystem;

namespace {

/// Per-case scratch directory, removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mesovms-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int line_count(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

PolicyRecord sample_record() {
    PolicyRecord record;
    record.delta = 2;
    LdrVmsPolicy vms;
    vms.history_depth = 2;
    vms.coefficients = Vector(4);
    vms.coefficients << 0.125, -1.0 / 3.0, 2.5e-7, -42.0;
    vms.thresholds = {-2.25, -0.5, 0.75, 1.875};
    record.vms = vms;
    LdrSignalPolicy signal;
    signal.history_depth = 2;
    signal.g_min = 0.1;
    Matrix b(2, 4);
    b << 0.1, -0.2, 0.3, -0.4, 1e-12, 7.0, -0.5, 0.0;
    signal.coefficients.emplace_back("I1", b);
    record.signal = signal;
    return record;
}

}  // namespace

TEST_CASE("shortest round-trip number formatting") {
    for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 2.5e-7, -42.0, 1e300}) {
        std::istringstream in(format_double(v));
        double back = 0.0;
        in >> back;
        CHECK(back == v);
    }
}

TEST_CASE("scenario json round-trips byte for byte") {
    ScenarioBundle bundle = builtin_scenario(4, 0.3, 9);
    std::string once = scenario_to_json(bundle);
    ScenarioBundle back = scenario_from_json(once);
    CHECK(scenario_to_json(back) == once);
    CHECK(back.name == bundle.name);
    CHECK(back.train_days.size() == 2);
    CHECK(back.test_days.size() == 2);
    CHECK(back.network.links.size() == bundle.network.links.size());
    CHECK(back.sim.horizon == bundle.sim.horizon);
    CHECK(back.default_profile == bundle.default_profile);
    for (std::size_t d = 0; d < bundle.train_days.size(); ++d)
        CHECK(back.train_days[d].origins == bundle.train_days[d].origins);
}

TEST_CASE("the bundled scenario file is in canonical form") {
    std::string raw = slurp(MESOVMS_SCENARIO_PATH);
    ScenarioBundle bundle = scenario_from_json(raw);
    CHECK(scenario_to_json(bundle) == raw);
    CHECK(bundle.name == "haining-synthetic");
    CHECK(bundle.train_days.size() == 10);
    CHECK(bundle.test_days.size() == 10);
    CHECK(bundle.network.links.size() == 24);
    CHECK(bundle.network.signalized_count() == 4);
    CHECK(bundle.sim.horizon == 60);
    CHECK(bundle.sim.warmup_steps == 5);
    CHECK(validate(bundle.network).ok());
    // every demand day fits the simulation horizon
    for (const auto& day : bundle.train_days)
        for (const auto& [zone, counts] : day.origins)
            CHECK(static_cast<int>(counts.size()) == bundle.sim.horizon);
}

TEST_CASE("scenario parser rejects malformed documents") {
    CHECK_THROWS_AS(scenario_from_json("not json at all"), DataError);
    CHECK_THROWS_AS(scenario_from_json("{}"), DataError);
    ScenarioBundle bundle = builtin_scenario(2, 0.3, 9);
    std::string text = scenario_to_json(bundle);
    std::string wrong =
        text.replace(text.find("\"format_version\": 1"), 19, "\"format_version\": 9");
    CHECK_THROWS_AS(scenario_from_json(wrong), DataError);
}

TEST_CASE("policy files round-trip exactly") {
    PolicyRecord record = sample_record();
    std::string once = policy_to_text(record);
    PolicyRecord back = policy_from_text(once);
    CHECK(policy_to_text(back) == once);
    REQUIRE(back.vms.has_value());
    REQUIRE(back.signal.has_value());
    CHECK(back.delta == 2);
    CHECK(back.vms->history_depth == 2);
    CHECK(back.vms->coefficients.cwiseEqual(record.vms->coefficients).all());
    CHECK(back.vms->thresholds == record.vms->thresholds);
    CHECK(back.signal->g_min == record.signal->g_min);
    REQUIRE(back.signal->coefficients.size() == 1);
    CHECK(back.signal->coefficients[0].first == "I1");
    CHECK(back.signal->coefficients[0].second.cwiseEqual(
        record.signal->coefficients[0].second).all());

    TempDir tmp;
    save_policy(record, tmp.file("p.txt"));
    PolicyRecord loaded = load_policy(tmp.file("p.txt"));
    CHECK(policy_to_text(loaded) == once);
}

TEST_CASE("policy parser rejects malformed input") {
    CHECK_THROWS_AS(policy_from_text(""), DataError);
    CHECK_THROWS_AS(policy_from_text("wrong header\n"), DataError);
    CHECK_THROWS_AS(policy_from_text("mesovms-policy v1\n"), DataError);  // no delta
    CHECK_THROWS_AS(policy_from_text("mesovms-policy v1\ndelta 1\n"), DataError);  // no segment
    CHECK_THROWS_AS(policy_from_text("mesovms-policy v1\ndelta 1\nbogus_field 3\n"), DataError);
    CHECK_THROWS_AS(
        policy_from_text("mesovms-policy v1\ndelta 1\nvms_thresholds 1 0 2 3\n"
                         "vms_coefficients 1\n0.5\n"),
        DataError);  // thresholds not increasing
    CHECK_THROWS_AS(load_policy("/nonexistent/path/p.txt"), DataError);
}

TEST_CASE("synth writes identical bundles for identical flags") {
    TempDir tmp;
    std::ostringstream log;
    SynthOptions opt;
    opt.days = 4;
    opt.sigma = 0.3;
    opt.seed = 12;
    opt.out = tmp.file("a.json");
    CHECK(cmd_synth(opt, log) == 0);
    opt.out = tmp.file("b.json");
    CHECK(cmd_synth(opt, log) == 0);
    CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("b.json")));

    ScenarioBundle bundle = load_scenario(tmp.file("a.json"));
    CHECK(bundle.train_days.size() == 2);
    CHECK(bundle.test_days.size() == 2);

    opt.days = 0;
    CHECK_THROWS_AS(cmd_synth(opt, log), ConfigError);
    opt.days = 4;
    opt.out.clear();
    CHECK_THROWS_AS(cmd_synth(opt, log), ConfigError);
}

TEST_CASE("train, evaluate and compare cooperate through files") {
    TempDir tmp;
    std::ostringstream log;
    SynthOptions synth;
    synth.days = 2;
    synth.sigma = 0.3;
    synth.seed = 12;
    synth.out = tmp.file("scn.json");
    REQUIRE(cmd_synth(synth, log) == 0);

    TrainCliOptions train;
    train.scenario = synth.out;
    train.out = tmp.file("pol.txt");
    train.particles = 3;
    train.iterations = 2;
    train.replications = 1;
    train.seed = 5;
    REQUIRE(cmd_train(train, log) == 0);

    PolicyRecord record = load_policy(train.out);
    REQUIRE(record.vms.has_value());
    CHECK_FALSE(record.signal.has_value());
    CHECK(record.delta == 1);
    std::string report = slurp(train.out + ".report");
    CHECK(report.find("baseline_objective_s") != std::string::npos);
    CHECK(report.find("best_objective_s") != std::string::npos);
    CHECK(report.find("train_data_sha256") != std::string::npos);

    SUBCASE("evaluate emits one row per test day plus a mean row") {
        EvaluateOptions ev;
        ev.scenario = synth.out;
        ev.vms = "ldr";
        ev.policy = train.out;
        ev.replications = 2;
        ev.seed = 3;
        ev.out = tmp.file("eval.csv");
        REQUIRE(cmd_evaluate(ev, log) == 0);
        std::string csv = slurp(ev.out);
        CHECK(csv.rfind("day,strategy,compliance,mean_travel_time_s,completed,counted,stranded\n",
                        0) == 0);
        CHECK(line_count(csv) == 3);  // header + 1 test day + mean
        CHECK(csv.find("ldr+default") != std::string::npos);
        CHECK(csv.find("0.1;0.3;0.5;0.7;0.9") != std::string::npos);
        CHECK(csv.find("\nmean,") != std::string::npos);

        ev.out = tmp.file("eval2.csv");
        REQUIRE(cmd_evaluate(ev, log) == 0);
        CHECK(slurp(tmp.file("eval.csv")) == slurp(tmp.file("eval2.csv")));
    }
    SUBCASE("evaluate refuses ldr without a policy") {
        EvaluateOptions ev;
        ev.scenario = synth.out;
        ev.vms = "ldr";
        ev.out = tmp.file("eval.csv");
        CHECK_THROWS_AS(cmd_evaluate(ev, log), ConfigError);
    }
    SUBCASE("evaluate validates strategy names and compliance strings") {
        EvaluateOptions ev;
        ev.scenario = synth.out;
        ev.out = tmp.file("eval.csv");
        ev.vms = "telepathy";
        CHECK_THROWS_AS(cmd_evaluate(ev, log), ConfigError);
        ev.vms = "genuine";
        ev.compliance = "0.1,0.2";
        CHECK_THROWS_AS(cmd_evaluate(ev, log), ConfigError);
        ev.compliance = "0.1,0.3,0.5,0.7,banana";
        CHECK_THROWS_AS(cmd_evaluate(ev, log), ConfigError);
        ev.compliance = "no-such-profile";
        CHECK_THROWS_AS(cmd_evaluate(ev, log), ConfigError);
        ev.compliance = "low";
        CHECK(cmd_evaluate(ev, log) == 0);
    }
    SUBCASE("compare produces the strategy-by-compliance matrix and the message log") {
        CompareOptions cmp;
        cmp.scenario = synth.out;
        cmp.policies = {train.out};
        cmp.compliances = {"high", "0.3,0.4,0.5,0.6,0.7"};
        cmp.seed = 3;
        cmp.out_dir = tmp.file("cmp");
        REQUIRE(cmd_compare(cmp, log) == 0);
        std::string table = slurp(tmp.file("cmp") + "/table2.csv");
        CHECK(table.rfind("strategy,0.1;0.3;0.5;0.7;0.9,0.3;0.4;0.5;0.6;0.7\n", 0) == 0);
        CHECK(table.find("genuine+default,") != std::string::npos);
        CHECK(table.find("ldr+default,") != std::string::npos);
        CHECK(line_count(table) == 3);
        std::string volume = slurp(tmp.file("cmp") + "/message_volume_log.csv");
        CHECK(volume.rfind("strategy,compliance,day,step,message,v_route1,v_route2,diff\n", 0) ==
              0);
        // 2 strategies x 2 profiles x 1 test day x 60 steps
        CHECK(line_count(volume) == 1 + 2 * 2 * 60);
    }
    SUBCASE("compare rejects duplicate strategies and an empty sweep") {
        CompareOptions cmp;
        cmp.scenario = synth.out;
        cmp.policies = {train.out, train.out};
        cmp.compliances = {"high"};
        cmp.out_dir = tmp.file("cmp");
        CHECK_THROWS_AS(cmd_compare(cmp, log), ConfigError);
        cmp.policies = {train.out};
        cmp.compliances = {};
        CHECK_THROWS_AS(cmd_compare(cmp, log), ConfigError);
    }
}

TEST_CASE("exit codes follow the 0/2/1 convention") {
    std::ostringstream err;
    CHECK(run_guarded([] { return 0; }, err) == 0);
    CHECK(run_guarded([]() -> int { throw ConfigError("c"); }, err) == 2);
    CHECK(run_guarded([]() -> int { throw DataError("d"); }, err) == 2);
    CHECK(run_guarded([]() -> int { throw ContractError("k"); }, err) == 2);
    CHECK(run_guarded([]() -> int { throw std::runtime_error("x"); }, err) == 1);
    CHECK(err.str().find("error: c") != std::string::npos);
    CHECK(err.str().find("internal error: x") != std::string::npos);
}

TEST_CASE("the command-line binary wires flags through to the commands") {
    TempDir tmp;
    std::string cli = MESOVMS_CLI_PATH;
    auto run = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("--help") == 0);
    CHECK(run("no-such-command") == 2);
    CHECK(run("synth") == 2);  // missing --out
    CHECK(run("synth --days 3 --sigma 0.2 --seed 4 --out " + tmp.file("a.json")) == 0);
    CHECK(run("synth --days 3 --sigma 0.2 --seed 4 --out " + tmp.file("b.json")) == 0);
    CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("b.json")));

    std::ostringstream log;
    SynthOptions opt;
    opt.days = 3;
    opt.sigma = 0.2;
    opt.seed = 4;
    opt.out = tmp.file("c.json");
    REQUIRE(cmd_synth(opt, log) == 0);
    CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("c.json")));

    CHECK(run("evaluate --scenario " + tmp.file("a.json") + " --vms ldr --out " +
              tmp.file("e.csv")) == 2);  // ldr needs --policy
}
