// Chain measurements, empirical event frequencies and implication reports.
#pragma once

#include "backbone/block_tree.hpp"
#include "backbone/params.hpp"
#include "backbone/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace backbone {

// Honest fraction of the last k entries. Requires k >= 1 and more than k entries.
double chain_quality(const std::vector<MinerKind>& kinds, std::uint32_t k);
// Same over a block chain, genesis first; genesis counts as honest.
double chain_quality(const BlockTree& tree, const std::vector<BlockId>& chain, std::uint32_t k);

bool is_prefix(const std::vector<BlockId>& prefix, const std::vector<BlockId>& chain);

struct PermanenceResult {
    bool holds = true;
    std::int64_t first_violation = 0; // round, when !holds
    std::int32_t miner = -1;
};

// Whether `prefix` stays a prefix of every honest adopted chain at every
// round from from_round to the record's last round.
PermanenceResult permanence_scan(const SimRecord& record, const std::vector<BlockId>& prefix, std::int64_t from_round,
                                 std::uint32_t chain = 0);

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval; z = 2.5758... gives 99% coverage.
inline constexpr double kZ99 = 2.5758293035489004;
Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = kZ99);

struct FrequencyReport {
    std::string event;
    std::int64_t span = 0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double failure_rate = 0.0;
    double bound = 1.0;      // analytic upper bound on the failure probability
    Interval ci;             // Wilson interval of the failure rate
    bool vacuous = false;    // bound >= 1
    bool flagged = false;    // failure rate significantly above the bound
};

inline constexpr std::uint64_t kMinFrequencyTrials = 1000;

// Event ids: E, E1, E2, E3 (one interval of length span), F (T from params),
// G and J (interval [span + 1, 2 span + 1] inside a trace of 3 span rounds).
// Trials use per-round binomial draws on the fast-path substream of
// (params.seed, trial); the result does not depend on `threads`.
FrequencyReport event_frequency(const std::string& event, std::int64_t span, const ProtocolParams& params,
                                std::uint64_t trials, unsigned threads = 1);
// Several events on the same trials; entry k equals event_frequency(events[k], ...).
std::vector<FrequencyReport> event_frequencies(const std::vector<std::string>& events, std::int64_t span,
                                              const ProtocolParams& params, std::uint64_t trials,
                                              unsigned threads = 1);

// Rounds from a block's broadcast until its transactions are in every honest
// ledger for the rest of the run; nullopt when that never happens in the horizon.
std::optional<std::int64_t> tx_latency(const SimRecord& record, BlockId block);
// Latency of every honest payload block, indexed by block id (nullopt for others).
std::vector<std::optional<std::int64_t>> tx_latencies(const SimRecord& record);

struct ImplicationReport {
    std::string theorem;
    std::uint64_t scanned = 0;    // points examined
    std::uint64_t held = 0;       // points where the premise held
    std::uint64_t violations = 0; // premise held, property failed
    std::vector<std::string> counterexamples; // first few fingerprints

    static constexpr std::size_t kMaxCounterexamples = 20;

    // `fingerprint` is called only for violations.
    template <typename F>
    void note(bool premise, bool property, F&& fingerprint)
    {
        ++scanned;
        if (!premise) return;
        ++held;
        if (property) return;
        ++violations;
        if (counterexamples.size() < kMaxCounterexamples) counterexamples.push_back(fingerprint());
    }
    void merge(const ImplicationReport& other);
};

} // namespace backbone
