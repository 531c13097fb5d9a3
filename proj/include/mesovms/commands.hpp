#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace mesovms {

struct SynthOptions {
    int days = 20;
    double sigma = 0.3;
    std::uint64_t seed = 7;
    std::string out;
};

struct TrainCliOptions {
    std::string scenario;
    std::string vms = "ldr";
    std::string signal = "default";
    std::string compliance;  ///< listed "c1,..,c5", profile name, or empty for default
    std::uint64_t seed = 1;
    std::string out;
    int particles = 20;
    int iterations = 30;
    int delta = 1;
    int replications = 1;
    bool freeze_thresholds = false;
};

struct EvaluateOptions {
    std::string scenario;
    std::string vms = "genuine";
    std::string signal = "default";
    std::string policy;  ///< required when either strategy is ldr
    std::string compliance;
    std::uint64_t seed = 1;
    int replications = 1;
    std::string out;
};

struct CompareOptions {
    std::string scenario;
    std::vector<std::string> policies;     ///< strategy of each is deduced from its segments
    std::vector<std::string> compliances;  ///< names or listed strings; must be non-empty
    std::uint64_t seed = 1;
    int replications = 1;
    std::string out_dir;
};

int cmd_synth(const SynthOptions& options, std::ostream& log);
int cmd_train(const TrainCliOptions& options, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
int cmd_compare(const CompareOptions& options, std::ostream& log);

/// Runs `body`, mapping exceptions to the exit-code convention:
/// 0 success, 2 usage/precondition/data problems, 1 anything else.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace mesovms
