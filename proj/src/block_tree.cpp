#include "backbone/block_tree.hpp"

#include <algorithm>
#include <string>

namespace backbone {

namespace {

// Skip-list heights as in Bitcoin Core's CBlockIndex::GetAncestor.
inline std::uint32_t invert_lowest_one(std::uint32_t n) { return n & (n - 1); }

inline std::uint32_t skip_height(std::uint32_t height)
{
    if (height < 2) return 0;
    return (height & 1) ? invert_lowest_one(invert_lowest_one(height - 1)) + 1 : invert_lowest_one(height);
}

} // namespace

BlockTree::BlockTree(std::uint32_t chain_count) : chain_count_(chain_count), by_height_(chain_count)
{
    if (chain_count == 0) throw TreeError("tree needs at least one chain");
    for (std::uint32_t j = 0; j < chain_count; ++j) {
        Block g;
        g.id = j;
        g.chain = j;
        g.broadcast_round = 0;
        blocks_.push_back(g);
        skip_.push_back(kNoBlock);
        by_height_[j].push_back({j});
    }
}

BlockId BlockTree::add(Block block)
{
    if (block.chain >= chain_count_) throw TreeError("chain index out of range");
    if (block.parent >= blocks_.size()) throw TreeError("unknown parent");
    const Block& parent = blocks_[block.parent];
    if (parent.chain != block.chain) throw TreeError("parent on a different chain");
    if (block.mined_round < parent.mined_round) throw TreeError("block mined before its parent");
    if (block.mined_round < 1) throw TreeError("blocks are mined from round 1");
    const auto existing = static_cast<BlockId>(blocks_.size());
    for (BlockId r : block.refs) {
        if (r >= existing) throw TreeError("unknown reference target");
        if (blocks_[r].mined_round > block.mined_round) throw TreeError("reference to a later block");
    }
    if (!block.refs.empty() && block.chain != 0) throw TreeError("only proposer blocks carry references");
    if (!block.votes.empty() && block.chain == 0) throw TreeError("proposer blocks cannot vote");
    for (const Vote& v : block.votes) {
        if (v.proposer >= existing || blocks_[v.proposer].chain != 0) throw TreeError("vote for a non-proposer block");
        if (blocks_[v.proposer].height != v.level || v.level == 0) throw TreeError("vote level mismatch");
        if (blocks_[v.proposer].mined_round > block.mined_round) throw TreeError("vote for a later block");
    }
    block.height = parent.height + 1;
    block.id = existing;
    const BlockId skip_target = ancestor(block.parent, skip_height(block.height));
    auto& level = by_height_[block.chain];
    if (level.size() <= block.height) level.resize(block.height + 1);
    level[block.height].push_back(block.id);
    skip_.push_back(skip_target);
    blocks_.push_back(std::move(block));
    return existing;
}

void BlockTree::set_broadcast(BlockId id, std::int64_t round)
{
    Block& b = blocks_.at(id);
    if (b.released()) throw TreeError("block " + std::to_string(id) + " already broadcast");
    b.broadcast_round = round;
}

BlockId BlockTree::ancestor(BlockId id, std::uint32_t height) const
{
    if (id >= blocks_.size() || height > blocks_[id].height) return kNoBlock;
    BlockId walk = id;
    std::uint32_t h = blocks_[walk].height;
    while (h > height) {
        const std::uint32_t hs = skip_height(h);
        const std::uint32_t hs_prev = skip_height(h - 1);
        if (skip_[walk] != kNoBlock &&
            (hs == height || (hs > height && !(hs_prev < hs - 2 && hs_prev >= height)))) {
            walk = skip_[walk];
            h = hs;
        } else {
            walk = blocks_[walk].parent;
            --h;
        }
    }
    return walk;
}

bool BlockTree::is_ancestor(BlockId ancestor_id, BlockId id) const
{
    if (blocks_[ancestor_id].chain != blocks_[id].chain) return false;
    return ancestor(id, blocks_[ancestor_id].height) == ancestor_id;
}

std::vector<BlockId> BlockTree::chain(BlockId tip) const
{
    std::vector<BlockId> out(blocks_.at(tip).height + 1);
    for (BlockId b = tip; b != kNoBlock; b = blocks_[b].parent) out[blocks_[b].height] = b;
    return out;
}

const std::vector<BlockId>& BlockTree::at_height(std::uint32_t chain, std::uint32_t height) const
{
    static const std::vector<BlockId> empty;
    const auto& level = by_height_.at(chain);
    return height < level.size() ? level[height] : empty;
}

std::uint32_t BlockTree::max_height(std::uint32_t chain) const
{
    return static_cast<std::uint32_t>(by_height_.at(chain).size() - 1);
}

} // namespace backbone
