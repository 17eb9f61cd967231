// Prism leader election and ledger construction over a miner's view.
#pragma once

#include "backbone/block_tree.hpp"
#include "backbone/sim.hpp"

#include <cstdint>
#include <vector>

namespace backbone {

inline constexpr std::uint32_t kNoEpoch = std::numeric_limits<std::uint32_t>::max();

// votemap[b][level] for voter block b: the earliest vote for that level on the
// chain ending at b. Empty for proposer blocks.
std::vector<std::vector<BlockId>> compute_votemaps(const BlockTree& tree);

// What one honest miner knows by a round: its known blocks and its adopted
// tip on every chain (index 0 is the proposer chain).
class PrismView {
public:
    PrismView(const SimRecord& record, std::int64_t round, std::int32_t miner);
    // Fixture view. An empty `known` means every block is known.
    PrismView(const BlockTree& tree, const std::vector<std::vector<BlockId>>& votemap, std::vector<BlockId> tips,
              std::vector<std::uint8_t> known = {});

    const BlockTree& tree() const { return *tree_; }
    bool knows(BlockId b) const;
    BlockId tip(std::uint32_t chain) const { return tips_.at(chain); }
    std::uint32_t voter_chains() const { return std::uint32_t(tips_.size() - 1); }
    // Counted vote of voter chain j (1-based) for a level, or kNoBlock.
    BlockId counted_vote(std::uint32_t chain, std::uint32_t level) const;

private:
    const BlockTree* tree_;
    const std::vector<std::vector<BlockId>>* votemap_;
    std::vector<BlockId> tips_;
    const ViewSet* views_ = nullptr;
    std::int32_t miner_ = 0;
    std::int64_t round_ = 0;
    std::vector<std::uint8_t> known_;
};

struct LeaderSequence {
    std::vector<BlockId> leaders;    // leaders[l - 1] is the level-l leader
    std::vector<std::uint32_t> votes; // counted votes of each leader

    std::uint32_t levels() const { return std::uint32_t(leaders.size()); }
    BlockId at(std::uint32_t level) const { return leaders.at(level - 1); }
    bool operator==(const LeaderSequence&) const = default;
};

// Most counted votes wins, ties by smallest id; a level without votes elects
// its smallest known block. Stops at the first level with no known block, and
// after up_to_level.
LeaderSequence elect_leaders(const PrismView& view, std::uint32_t up_to_level = UINT32_MAX);

// Leader sequences of every honest view at one round, deduplicated.
struct RoundSequences {
    std::vector<LeaderSequence> distinct;
    std::vector<std::uint32_t> of_miner; // index into distinct
};
RoundSequences view_sequences(const SimRecord& record, std::int64_t round);

struct Ledger {
    std::vector<std::vector<BlockId>> epochs; // one per leader, topologically sorted
    std::vector<Tx> txs;                      // accepted, in ledger order
    std::vector<Tx> discarded;                // redundant or conflicting
    // Set when a reachable block is unknown to the view; epochs stop before
    // the leader that reaches it.
    bool partial = false;
};

// Epoch (1-based level) that first reaches each block, kNoEpoch if none.
// Reachability follows every link: parents, references and votes.
// Returns the number of complete epochs through `complete`.
std::vector<std::uint32_t> epoch_map(const PrismView& view, const LeaderSequence& seq, std::uint32_t* complete = nullptr);

// Epochs in leader order; within an epoch a block follows every block it
// links to, ties by mined round then id. Transactions keep block order; the
// first transaction with a given token or conflict key wins.
Ledger build_ledger(const PrismView& view, const LeaderSequence& seq);

// Every honest transaction in a block broadcast early enough for the level-l
// leader's miner to have heard of it (by round R - T, R the leader's mined
// round) is in the ledger of LedSeq_l of every honest view at round r whose
// level-l leader is honest. Vacuously true when no such view exists.
bool honest_leader_inclusion_check(const SimRecord& record, std::uint32_t level, std::int64_t round);

} // namespace backbone
