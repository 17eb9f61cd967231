// Round-by-round execution of the Bitcoin and Prism backbones.
#pragma once

#include "backbone/adversary.hpp"
#include "backbone/block_tree.hpp"
#include "backbone/network.hpp"
#include "backbone/params.hpp"
#include "backbone/trace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace backbone {

// Honest state "by round r": after the deliveries of round r, before mining.
// Miners with identical tips on every chain share a class.
struct ViewRound {
    std::vector<BlockId> class_tips; // classes x chains, row-major
    std::vector<std::uint16_t> miner_class;

    std::uint32_t classes(std::uint32_t chains) const { return std::uint32_t(class_tips.size() / chains); }
};

struct SimRecord {
    ProtocolParams params;
    DerivedParams derived;
    std::string adversary;
    bool prism = false;
    std::uint32_t chains = 1;
    std::uint64_t trial = 0;
    Trace trace;
    BlockTree tree;
    ViewSet views;                 // per block and miner: first round the miner may react to it
    std::vector<ViewRound> rounds; // index r - 1 for r = 1 .. horizon + 1
    // Per chain and round (index r - 1): uniquely successful / T-doubly-isolated.
    std::vector<std::vector<std::uint8_t>> unique_round;
    std::vector<std::vector<std::uint8_t>> isolated_round;
    // Prism only: votemap[b][level] is the counted vote of the chain ending at
    // voter block b; empty for other blocks.
    std::vector<std::vector<BlockId>> votemap;
    // Prism only: first_level_round[l] is the round the first level-l proposer block was mined.
    std::vector<std::int64_t> first_level_round;
    std::uint64_t adversary_mined = 0;
    std::uint64_t adversary_successes = 0;

    std::uint32_t honest_miners() const { return params.n - params.t; }
    std::int64_t last_round() const { return std::int64_t(params.horizon) + 1; }
    const ViewRound& at(std::int64_t round) const { return rounds.at(round - 1); }
    BlockId tip(std::int64_t round, std::int32_t miner, std::uint32_t chain) const;
    BlockId class_tip(std::int64_t round, std::uint32_t cls, std::uint32_t chain) const;
    BlockId counted_vote(BlockId voter_tip, std::uint32_t level) const;
};

using PrismRecord = SimRecord;

struct RunOptions {
    bool unsafe = false; // skip the honest-majority check
};

// Trace, miner assignment and adversary draw from independent substreams
// keyed by (params.seed, trial).
SimRecord run(const ProtocolParams& params, Adversary& adversary, std::uint64_t trial = 0, RunOptions options = {});
PrismRecord run_prism(const ProtocolParams& params, Adversary& adversary, std::uint64_t trial = 0,
                      RunOptions options = {});
// Runs against a given trace (length = horizon).
SimRecord run_with_trace(const ProtocolParams& params, Adversary& adversary, Trace trace, bool prism,
                         std::uint64_t trial = 0, RunOptions options = {});

std::vector<BlockId> adopted_chain(const SimRecord& record, std::int32_t miner, std::int64_t round,
                                   std::uint32_t chain = 0);
// Drops the last k blocks; genesis only when the chain is not longer than k.
std::vector<BlockId> prefix_k(const std::vector<BlockId>& chain, std::uint32_t k);

// At the height of the honest block of a uniquely successful (T = 1) or
// T-doubly-isolated round, no other honest block exists anywhere in the tree,
// so every chain holds either that block or an adversarial one.
bool assert_unique_block(const SimRecord& record, std::int64_t round, std::uint32_t chain = 0);

} // namespace backbone
