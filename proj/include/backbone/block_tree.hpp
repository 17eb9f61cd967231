// Block storage for one or more parallel chains.
#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace backbone {

using BlockId = std::uint32_t;
inline constexpr BlockId kNoBlock = std::numeric_limits<BlockId>::max();
inline constexpr std::int64_t kUnreleased = -1;

enum class MinerKind : std::uint8_t { honest, adversarial };

struct Tx {
    std::uint64_t token = 0;
    std::uint64_t conflict_key = 0; // transactions conflict iff keys match
    bool operator==(const Tx&) const = default;
};

struct Vote {
    std::uint32_t level = 0;
    BlockId proposer = kNoBlock;
    bool operator==(const Vote&) const = default;
};

struct Block {
    BlockId id = kNoBlock;
    std::uint32_t chain = 0;
    BlockId parent = kNoBlock;
    MinerKind kind = MinerKind::honest;
    std::int32_t miner = -1; // honest miner index; -1 for adversarial and genesis blocks
    std::int64_t mined_round = 0;
    std::uint32_t height = 0; // level for proposer blocks
    std::int64_t broadcast_round = kUnreleased;
    std::vector<BlockId> refs; // proposer blocks only, excluding the parent
    std::vector<Vote> votes;   // voter blocks only
    std::vector<Tx> payload;

    bool honest() const { return kind == MinerKind::honest; }
    bool released() const { return broadcast_round != kUnreleased; }
};

class TreeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Genesis of chain j has id j. Later ids are assigned in insertion order.
class BlockTree {
public:
    explicit BlockTree(std::uint32_t chain_count = 1);

    // Validates linkage (parent on the same chain, height, round ordering) and
    // assigns the id. Reference and vote targets must already exist.
    BlockId add(Block block);
    void set_broadcast(BlockId id, std::int64_t round);

    const Block& at(BlockId id) const { return blocks_.at(id); }
    const Block& operator[](BlockId id) const { return blocks_[id]; }
    std::size_t size() const { return blocks_.size(); }
    std::uint32_t chain_count() const { return chain_count_; }
    BlockId genesis(std::uint32_t chain) const { return chain; }
    bool is_genesis(BlockId id) const { return id < chain_count_; }

    BlockId ancestor(BlockId id, std::uint32_t height) const;
    bool is_ancestor(BlockId ancestor_id, BlockId id) const;
    // Genesis first, tip last.
    std::vector<BlockId> chain(BlockId tip) const;
    const std::vector<BlockId>& at_height(std::uint32_t chain, std::uint32_t height) const;
    std::uint32_t max_height(std::uint32_t chain) const;

    // Every block this one links to: parent (except for voter blocks when
    // reference_only is set), extra references and vote targets.
    template <typename F>
    void for_each_link(BlockId id, bool reference_only, F&& f) const
    {
        const Block& b = blocks_[id];
        if (b.parent != kNoBlock && !(reference_only && b.chain != 0)) f(b.parent);
        for (BlockId r : b.refs) f(r);
        for (const Vote& v : b.votes) f(v.proposer);
    }

private:
    std::uint32_t chain_count_;
    std::vector<Block> blocks_;
    std::vector<BlockId> skip_;
    std::vector<std::vector<std::vector<BlockId>>> by_height_;
};

} // namespace backbone
