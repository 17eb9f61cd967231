// Experiment runner shared by the command line tool and the Python module.
#pragma once

#include "backbone/config.hpp"
#include "backbone/export.hpp"
#include "backbone/suites.hpp"

#include <functional>
#include <string>
#include <vector>

namespace backbone {

struct TrialSummary {
    std::uint64_t trial = 0;
    std::uint64_t violations = 0;
    std::uint64_t adversary_mined = 0;
    std::uint64_t adversary_successes = 0;
};

struct SimulateResult {
    std::vector<std::string> warnings;
    std::vector<TrialSummary> trials; // sorted by trial index
    SuiteReport implications;         // merged in trial order
    std::vector<FrequencyReport> events;
    std::vector<LatencyRow> latency;
    std::vector<BoundReport> bounds;

    std::uint64_t violations() const { return implications.violations(); }
};

// Called once per trial with the finished record, possibly from a worker thread.
using RecordSink = std::function<void(const SimRecord&)>;

unsigned resolve_threads(const ExperimentConfig& config);
SuiteOptions suite_options(const ExperimentConfig& config);

// One trial of the configured protocol and adversary.
SimRecord simulate_one(const ExperimentConfig& config, std::uint64_t trial);

// Validates, then runs every requested suite. Trials run in parallel; all
// aggregates are assembled in trial order, so results do not depend on the
// thread count.
SimulateResult simulate(ExperimentConfig config, const RecordSink& sink = {});

// Requested probability formulas over the argument grid, then wait formulas
// over the eps list.
std::vector<BoundReport> bounds_table(const ExperimentConfig& config);

struct LipschitzReport {
    std::uint64_t windows = 0;
    std::uint64_t x_violations = 0; // |dx| > 1
    std::uint64_t y_violations = 0; // |dy| > 2
    double max_dx = 0.0;
    double max_dy = 0.0;
};

// Random windows with a random delay T and one perturbed coordinate.
LipschitzReport lipschitz_check(std::uint64_t windows, std::uint64_t seed, unsigned threads);

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> lines; // one per check: "PASS|FAIL <suite> <detail>"
};

inline const std::vector<std::string> kVerifySuites = {"implications", "events", "lipschitz", "reproducibility",
                                                       "planted"};
inline const std::vector<std::string> kDefaultVerifySuites = {"implications", "events", "lipschitz",
                                                              "reproducibility"};

// "planted" runs the implication suites on a record with a planted violation
// and fails, printing the fingerprint; it exists to exercise the failure path.
VerifyResult verify(const ExperimentConfig& config, const std::vector<std::string>& suites);

} // namespace backbone
