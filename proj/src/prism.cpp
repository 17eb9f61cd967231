#include "backbone/prism.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <unordered_set>

namespace backbone {

std::vector<std::vector<BlockId>> compute_votemaps(const BlockTree& tree)
{
    std::vector<std::vector<BlockId>> out(tree.size());
    for (BlockId b = 0; b < tree.size(); ++b) {
        const Block& blk = tree[b];
        if (blk.chain == 0 || blk.parent == kNoBlock) continue;
        auto map = out[blk.parent];
        for (const Vote& v : blk.votes) {
            if (map.size() <= v.level) map.resize(v.level + 1, kNoBlock);
            if (map[v.level] == kNoBlock) map[v.level] = v.proposer;
        }
        out[b] = std::move(map);
    }
    return out;
}

PrismView::PrismView(const SimRecord& record, std::int64_t round, std::int32_t miner)
    : tree_(&record.tree), votemap_(&record.votemap), views_(&record.views), miner_(miner), round_(round)
{
    if (!record.prism) throw std::invalid_argument("not a Prism record");
    tips_.resize(record.chains);
    for (std::uint32_t j = 0; j < record.chains; ++j) tips_[j] = record.tip(round, miner, j);
}

PrismView::PrismView(const BlockTree& tree, const std::vector<std::vector<BlockId>>& votemap, std::vector<BlockId> tips,
                     std::vector<std::uint8_t> known)
    : tree_(&tree), votemap_(&votemap), tips_(std::move(tips)), known_(std::move(known))
{
    if (tips_.size() != tree.chain_count()) throw std::invalid_argument("one tip per chain required");
}

bool PrismView::knows(BlockId b) const
{
    if (views_) return views_->knows(b, miner_, round_);
    return known_.empty() || (b < known_.size() && known_[b]);
}

BlockId PrismView::counted_vote(std::uint32_t chain, std::uint32_t level) const
{
    const auto& map = (*votemap_)[tips_.at(chain)];
    return level < map.size() ? map[level] : kNoBlock;
}

LeaderSequence elect_leaders(const PrismView& view, std::uint32_t up_to_level)
{
    const BlockTree& tree = view.tree();
    const std::uint32_t top = std::min(up_to_level, tree.max_height(0));
    LeaderSequence seq;
    std::vector<std::pair<BlockId, std::uint32_t>> tally;
    for (std::uint32_t level = 1; level <= top; ++level) {
        tally.clear();
        for (std::uint32_t j = 1; j <= view.voter_chains(); ++j) {
            const BlockId v = view.counted_vote(j, level);
            if (v == kNoBlock) continue;
            auto it = std::find_if(tally.begin(), tally.end(), [v](const auto& e) { return e.first == v; });
            if (it == tally.end()) tally.push_back({v, 1});
            else ++it->second;
        }
        BlockId best = kNoBlock;
        std::uint32_t best_votes = 0;
        for (const auto& [b, n] : tally)
            if (n > best_votes || (n == best_votes && b < best)) {
                best = b;
                best_votes = n;
            }
        if (best == kNoBlock) {
            for (BlockId b : tree.at_height(0, level))
                if (view.knows(b)) {
                    best = b;
                    break;
                }
        }
        if (best == kNoBlock) break;
        seq.leaders.push_back(best);
        seq.votes.push_back(best_votes);
    }
    return seq;
}

RoundSequences view_sequences(const SimRecord& record, std::int64_t round)
{
    // Miners in one class share every tip, hence every counted vote and the
    // highest known level. Known sets can differ only for T > 1, and only
    // matter at levels without votes.
    const ViewRound& v = record.at(round);
    const std::uint32_t classes = v.classes(record.chains);
    const std::uint32_t miners = record.honest_miners();
    std::vector<std::int32_t> rep(classes, -1);
    for (std::uint32_t i = 0; i < miners; ++i)
        if (rep[v.miner_class[i]] < 0) rep[v.miner_class[i]] = std::int32_t(i);
    std::vector<LeaderSequence> base(classes);
    for (std::uint32_t c = 0; c < classes; ++c) base[c] = elect_leaders(PrismView(record, round, rep[c]));

    RoundSequences out;
    out.of_miner.resize(miners);
    auto intern = [&out](LeaderSequence seq) {
        for (std::size_t k = 0; k < out.distinct.size(); ++k)
            if (out.distinct[k] == seq) return std::uint32_t(k);
        out.distinct.push_back(std::move(seq));
        return std::uint32_t(out.distinct.size() - 1);
    };
    std::vector<std::uint32_t> base_index(classes);
    for (std::uint32_t c = 0; c < classes; ++c) base_index[c] = intern(base[c]);
    const BlockTree& tree = record.tree;
    for (std::uint32_t i = 0; i < miners; ++i) {
        const std::uint32_t c = v.miner_class[i];
        if (record.params.T == 1 || std::int32_t(i) == rep[c]) {
            out.of_miner[i] = base_index[c];
            continue;
        }
        LeaderSequence seq = base[c];
        bool changed = false;
        for (std::uint32_t l = 1; l <= seq.levels(); ++l) {
            if (seq.votes[l - 1] != 0) continue;
            for (BlockId b : tree.at_height(0, l))
                if (record.views.knows(b, std::int32_t(i), round)) {
                    changed |= b != seq.leaders[l - 1];
                    seq.leaders[l - 1] = b;
                    break;
                }
        }
        out.of_miner[i] = changed ? intern(std::move(seq)) : base_index[c];
    }
    return out;
}

std::vector<std::uint32_t> epoch_map(const PrismView& view, const LeaderSequence& seq, std::uint32_t* complete)
{
    const BlockTree& tree = view.tree();
    std::vector<std::uint32_t> epoch(tree.size(), kNoEpoch);
    std::vector<BlockId> stack, added;
    std::uint32_t done = 0;
    for (std::uint32_t l = 1; l <= seq.levels(); ++l) {
        added.clear();
        bool dangling = false;
        stack.assign(1, seq.at(l));
        if (epoch[seq.at(l)] == kNoEpoch) epoch[seq.at(l)] = l, added.push_back(seq.at(l));
        else stack.clear();
        while (!stack.empty() && !dangling) {
            const BlockId b = stack.back();
            stack.pop_back();
            if (!view.knows(b)) {
                dangling = true;
                break;
            }
            tree.for_each_link(b, false, [&](BlockId link) {
                if (epoch[link] != kNoEpoch) return;
                epoch[link] = l;
                added.push_back(link);
                stack.push_back(link);
            });
        }
        if (dangling) {
            for (BlockId b : added) epoch[b] = kNoEpoch;
            break;
        }
        done = l;
    }
    if (complete) *complete = done;
    return epoch;
}

Ledger build_ledger(const PrismView& view, const LeaderSequence& seq)
{
    const BlockTree& tree = view.tree();
    std::uint32_t complete = 0;
    const auto epoch = epoch_map(view, seq, &complete);
    Ledger ledger;
    ledger.partial = complete < seq.levels();
    ledger.epochs.resize(complete);
    for (BlockId b = 0; b < tree.size(); ++b)
        if (epoch[b] != kNoEpoch) ledger.epochs[epoch[b] - 1].push_back(b);

    std::unordered_set<std::uint64_t> tokens, keys;
    for (auto& blocks : ledger.epochs) {
        // Kahn's algorithm restricted to the epoch; links into earlier epochs
        // are already satisfied.
        std::map<BlockId, std::uint32_t> waiting;
        std::map<BlockId, std::vector<BlockId>> dependents;
        const std::unordered_set<BlockId> members(blocks.begin(), blocks.end());
        for (BlockId b : blocks) {
            std::uint32_t n = 0;
            tree.for_each_link(b, false, [&](BlockId link) {
                if (members.count(link)) {
                    ++n;
                    dependents[link].push_back(b);
                }
            });
            waiting[b] = n;
        }
        auto later = [&tree](BlockId a, BlockId b) {
            return std::tie(tree[a].mined_round, a) > std::tie(tree[b].mined_round, b);
        };
        std::priority_queue<BlockId, std::vector<BlockId>, decltype(later)> ready(later);
        for (const auto& [b, n] : waiting)
            if (n == 0) ready.push(b);
        std::vector<BlockId> order;
        while (!ready.empty()) {
            const BlockId b = ready.top();
            ready.pop();
            order.push_back(b);
            for (BlockId d : dependents[b])
                if (--waiting[d] == 0) ready.push(d);
        }
        blocks = std::move(order);
        for (BlockId b : blocks)
            for (const Tx& tx : tree[b].payload) {
                if (tokens.count(tx.token) || keys.count(tx.conflict_key)) {
                    ledger.discarded.push_back(tx);
                    continue;
                }
                tokens.insert(tx.token);
                keys.insert(tx.conflict_key);
                ledger.txs.push_back(tx);
            }
    }
    return ledger;
}

bool honest_leader_inclusion_check(const SimRecord& record, std::uint32_t level, std::int64_t round)
{
    const BlockTree& tree = record.tree;
    const RoundSequences views = view_sequences(record, round);
    for (const LeaderSequence& full : views.distinct) {
        if (full.levels() < level || !tree[full.at(level)].honest()) continue;
        LeaderSequence seq = full;
        seq.leaders.resize(level);
        seq.votes.resize(level);
        const std::int64_t cutoff = tree[seq.at(level)].mined_round - record.params.T;
        // The view is only used for dangling checks, which closure rules out here.
        const PrismView view(record, round, std::int32_t(std::find(views.of_miner.begin(), views.of_miner.end(),
                                                                    std::uint32_t(&full - views.distinct.data())) -
                                                          views.of_miner.begin()));
        const auto epoch = epoch_map(view, seq);
        for (BlockId b = tree.chain_count(); b < tree.size(); ++b) {
            const Block& blk = tree[b];
            if (!blk.honest() || blk.payload.empty() || blk.broadcast_round > cutoff) continue;
            if (epoch[b] > level) return false;
        }
    }
    return true;
}

} // namespace backbone
