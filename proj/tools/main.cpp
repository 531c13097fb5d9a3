#include <iostream>

#include <CLI11.hpp>

#include "mesovms/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Mesoscopic two-route traffic simulator with trainable message-sign "
        "and signal controllers"};
    app.require_subcommand(1);

    mesovms::SynthOptions synth;
    CLI::App* s = app.add_subcommand("synth", "Generate a synthetic scenario bundle");
    s->add_option("--days", synth.days, "Demand days to generate (first half train, rest test)");
    s->add_option("--sigma", synth.sigma, "Day-to-day demand spread (lognormal sigma)");
    s->add_option("--seed", synth.seed, "Generator seed");
    s->add_option("--out", synth.out, "Scenario file to write")->required();

    mesovms::TrainCliOptions train;
    CLI::App* t = app.add_subcommand("train", "Fit LDR coefficients on the training days");
    t->add_option("--scenario", train.scenario, "Scenario file")->required();
    t->add_option("--vms", train.vms, "VMS strategy during training")
        ->check(CLI::IsMember({"ldr", "genuine", "none"}));
    t->add_option("--signal", train.signal, "Signal strategy during training")
        ->check(CLI::IsMember({"ldr", "default"}));
    t->add_option("--compliance", train.compliance,
                  "Profile name or listed values c1,c2,c3,c4,c5");
    t->add_option("--seed", train.seed, "Swarm and evaluation seed");
    t->add_option("--out", train.out, "Policy file to write")->required();
    t->add_option("--particles", train.particles, "Swarm size");
    t->add_option("--iterations", train.iterations, "Swarm iterations");
    t->add_option("--delta", train.delta, "History depth of the decision rules");
    t->add_option("--replications", train.replications, "Simulations per day per evaluation");
    t->add_flag("--freeze-thresholds", train.freeze_thresholds,
                "Keep the default message thresholds instead of training them");

    mesovms::EvaluateOptions evaluate;
    CLI::App* e = app.add_subcommand("evaluate", "Score one strategy on the test days");
    e->add_option("--scenario", evaluate.scenario, "Scenario file")->required();
    e->add_option("--vms", evaluate.vms, "VMS strategy")
        ->check(CLI::IsMember({"ldr", "genuine", "none"}));
    e->add_option("--signal", evaluate.signal, "Signal strategy")
        ->check(CLI::IsMember({"ldr", "default"}));
    e->add_option("--policy", evaluate.policy, "Trained policy file (needed for ldr)");
    e->add_option("--compliance", evaluate.compliance,
                  "Profile name or listed values c1,c2,c3,c4,c5");
    e->add_option("--seed", evaluate.seed, "Evaluation seed");
    e->add_option("--replications", evaluate.replications, "Simulations per day");
    e->add_option("--out", evaluate.out, "CSV file to write")->required();

    mesovms::CompareOptions compare;
    CLI::App* c = app.add_subcommand(
        "compare", "Strategy-by-compliance comparison matrix plus the message/volume log");
    c->add_option("--scenario", compare.scenario, "Scenario file")->required();
    c->add_option("--policy", compare.policies,
                  "Trained policy file; repeatable, strategy deduced from its segments");
    c->add_option("--compliance", compare.compliances,
                  "Profile name or listed values; repeatable")
        ->required();
    c->add_option("--seed", compare.seed, "Evaluation seed");
    c->add_option("--replications", compare.replications, "Simulations per day");
    c->add_option("--out", compare.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    auto guarded = [&](auto&& fn) { return mesovms::run_guarded(fn, std::cerr); };
    if (s->parsed()) return guarded([&] { return mesovms::cmd_synth(synth, std::cout); });
    if (t->parsed()) return guarded([&] { return mesovms::cmd_train(train, std::cout); });
    if (e->parsed()) return guarded([&] { return mesovms::cmd_evaluate(evaluate, std::cout); });
    if (c->parsed()) return guarded([&] { return mesovms::cmd_compare(compare, std::cout); });
    return 2;
}
