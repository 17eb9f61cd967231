#include "backbone/sim.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace backbone {

BlockId SimRecord::class_tip(std::int64_t round, std::uint32_t cls, std::uint32_t chain) const
{
    return at(round).class_tips.at(std::size_t(cls) * chains + chain);
}

BlockId SimRecord::tip(std::int64_t round, std::int32_t miner, std::uint32_t chain) const
{
    const ViewRound& v = at(round);
    return v.class_tips.at(std::size_t(v.miner_class.at(miner)) * chains + chain);
}

BlockId SimRecord::counted_vote(BlockId voter_tip, std::uint32_t level) const
{
    if (voter_tip >= votemap.size()) return kNoBlock;
    const auto& map = votemap[voter_tip];
    return level < map.size() ? map[level] : kNoBlock;
}

namespace {

struct MinerState {
    std::vector<BlockId> tip;            // per chain
    std::vector<BlockId> first_at_level; // first proposer block received per level
    std::vector<BlockId> unref;          // candidates; entries may have become referenced since
    std::vector<std::uint8_t> referenced;
};

class Engine final : public AdversaryContext {
public:
    Engine(const ProtocolParams& params, const DerivedParams& d, Adversary& adversary, Trace trace, bool prism,
           std::uint64_t trial)
        : adversary_(adversary), net_(params.n - params.t, params.T, params.horizon),
          assign_rng_(params.seed, trial, Substream::miner_assignment), adv_rng_(params.seed, trial, Substream::adversary)
    {
        rec_.params = params;
        rec_.derived = d;
        rec_.adversary = adversary.name();
        rec_.prism = prism;
        rec_.chains = prism ? params.m + 1 : 1;
        rec_.trial = trial;
        if (trace.chain_count() != rec_.chains || trace.rounds() != params.horizon)
            throw TraceError("trace shape does not match the run");
        rec_.trace = std::move(trace);
        rec_.tree = BlockTree(rec_.chains);
        const std::uint32_t honest = params.n - params.t;
        rec_.views = ViewSet(honest);
        rec_.votemap.resize(rec_.chains);
        for (std::uint32_t j = 0; j < rec_.chains; ++j) {
            rec_.views.add_block();
            for (std::uint32_t i = 0; i < honest; ++i) rec_.views.plan(j, std::int32_t(i), 0);
        }
        miners_.resize(honest);
        for (auto& m : miners_) {
            m.tip.resize(rec_.chains);
            for (std::uint32_t j = 0; j < rec_.chains; ++j) m.tip[j] = j;
            if (prism) {
                m.first_at_level.assign(1, 0);
                m.referenced.assign(rec_.chains, 1); // genesis blocks are never referenced explicitly
            }
        }
        perm_.resize(honest);
        std::iota(perm_.begin(), perm_.end(), 0u);
        budget_.assign(rec_.chains, 0);
        public_tip_.resize(rec_.chains);
        for (std::uint32_t j = 0; j < rec_.chains; ++j) public_tip_[j] = j;
    }

    SimRecord run()
    {
        const std::int64_t horizon = rec_.params.horizon;
        rec_.rounds.reserve(horizon + 1);
        for (round_ = 1; round_ <= horizon; ++round_) {
            deliver(round_);
            record();
            mine_honest();
            for (std::uint32_t j = 0; j < rec_.chains; ++j) budget_[j] = rec_.trace.z(j, round_);
            adversary_.act(*this);
        }
        round_ = horizon + 1;
        deliver(round_);
        record();
        finish();
        return std::move(rec_);
    }

    // AdversaryContext
    std::int64_t round() const override { return round_; }
    std::uint32_t T() const override { return rec_.params.T; }
    std::uint32_t chains() const override { return rec_.chains; }
    std::uint32_t honest_miners() const override { return std::uint32_t(miners_.size()); }
    const BlockTree& tree() const override { return rec_.tree; }
    std::uint32_t budget(std::uint32_t chain) const override { return budget_.at(chain); }
    BlockId honest_tip(std::int32_t miner, std::uint32_t chain) const override { return miners_.at(miner).tip.at(chain); }
    BlockId public_tip(std::uint32_t chain) const override { return public_tip_.at(chain); }
    CounterRng& rng() override { return adv_rng_; }
    BlockId counted_vote(BlockId voter_tip, std::uint32_t level) const override
    {
        return rec_.counted_vote(voter_tip, level);
    }

    BlockId minable_tip(std::uint32_t chain) const override
    {
        const BlockTree& tree = rec_.tree;
        for (std::int64_t h = tree.max_height(chain); h >= 0; --h)
            for (BlockId b : tree.at_height(chain, std::uint32_t(h)))
                if (extendable(b)) return b;
        return tree.genesis(chain);
    }

    BlockId mine(const MineRequest& req) override
    {
        const BlockTree& tree = rec_.tree;
        if (req.chain >= rec_.chains) throw AdversaryViolation("mining on an unknown chain");
        if (budget_[req.chain] == 0)
            throw AdversaryViolation("mining budget exhausted on chain " + std::to_string(req.chain) + " in round " +
                                     std::to_string(round_));
        if (req.parent >= tree.size() || tree[req.parent].chain != req.chain)
            throw AdversaryViolation("invalid parent");
        if (!extendable(req.parent)) throw AdversaryViolation("parent mined by an honest miner in the current round");
        if (!rec_.prism && (!req.refs.empty() || !req.votes.empty()))
            throw AdversaryViolation("bitcoin blocks carry no references or votes");
        if (req.chain == 0 && !req.votes.empty()) throw AdversaryViolation("proposer blocks cannot vote");
        if (req.chain != 0 && !req.refs.empty()) throw AdversaryViolation("voter blocks cannot reference");
        for (BlockId r : req.refs)
            if (r >= tree.size() || !extendable(r)) throw AdversaryViolation("invalid reference");
        std::vector<std::uint32_t> levels;
        for (const Vote& v : req.votes) {
            if (v.proposer >= tree.size() || tree[v.proposer].chain != 0 || tree[v.proposer].height != v.level ||
                v.level == 0 || !extendable(v.proposer))
                throw AdversaryViolation("invalid vote");
            levels.push_back(v.level);
        }
        std::sort(levels.begin(), levels.end());
        if (std::adjacent_find(levels.begin(), levels.end()) != levels.end())
            throw AdversaryViolation("two votes for one level in a block");

        Block b;
        b.chain = req.chain;
        b.parent = req.parent;
        b.kind = MinerKind::adversarial;
        b.miner = -1;
        b.mined_round = round_;
        b.refs = req.refs;
        b.votes = req.votes;
        b.payload = req.payload;
        const BlockId id = add_block(std::move(b));
        --budget_[req.chain];
        ++rec_.adversary_mined;
        return id;
    }

    void release(BlockId block, const DelayPolicy& policy) override
    {
        const BlockTree& tree = rec_.tree;
        if (block >= tree.size() || tree[block].honest()) throw AdversaryViolation("can only release adversarial blocks");
        if (tree[block].released()) throw AdversaryViolation("block already released");
        check_policy(policy);
        // Withheld blocks this one links to go out with it, oldest first.
        std::vector<BlockId> order;
        std::vector<BlockId> stack{block};
        std::vector<std::uint8_t> seen(tree.size(), 0);
        seen[block] = 1;
        while (!stack.empty()) {
            const BlockId b = stack.back();
            stack.pop_back();
            order.push_back(b);
            tree.for_each_link(b, false, [&](BlockId l) {
                if (!seen[l] && !tree[l].released()) {
                    seen[l] = 1;
                    stack.push_back(l);
                }
            });
        }
        std::sort(order.begin(), order.end());
        for (BlockId b : order) broadcast(b, -1, policy);
    }

private:
    bool extendable(BlockId b) const
    {
        const Block& blk = rec_.tree[b];
        return blk.mined_round < round_ || !blk.honest();
    }

    void check_policy(const DelayPolicy& policy) const
    {
        if (policy.kind != DelayPolicy::Kind::adversarial) return;
        if (policy.offsets.size() != miners_.size()) throw AdversaryViolation("delay policy size mismatch");
        for (auto o : policy.offsets)
            if (o < 1 || o > rec_.params.T) throw AdversaryViolation("delivery outside the delay window");
    }

    BlockId add_block(Block b)
    {
        const BlockId id = rec_.tree.add(std::move(b));
        rec_.views.add_block();
        const Block& blk = rec_.tree[id];
        if (rec_.prism) {
            std::vector<BlockId> map;
            if (blk.chain != 0) {
                map = rec_.votemap[blk.parent];
                for (const Vote& v : blk.votes) {
                    if (map.size() <= v.level) map.resize(v.level + 1, kNoBlock);
                    if (map[v.level] == kNoBlock) map[v.level] = v.proposer;
                }
            }
            rec_.votemap.push_back(std::move(map));
        }
        return id;
    }

    void broadcast(BlockId id, std::int32_t sender, const DelayPolicy& policy)
    {
        rec_.tree.set_broadcast(id, round_);
        const Block& blk = rec_.tree[id];
        auto events = schedule(id, sender, round_, honest_miners(), rec_.params.T, policy);
        if (sender >= 0) events.push_back({id, sender, sender, round_, round_ + 1});
        net_.submit(rec_.tree, events, rec_.views);
        const Block& best = rec_.tree[public_tip_[blk.chain]];
        if (blk.height > best.height) public_tip_[blk.chain] = id;
    }

    void deliver(std::int64_t round)
    {
        const BlockTree& tree = rec_.tree;
        for (const DeliveryEvent& e : net_.deliver(round)) {
            MinerState& m = miners_[e.recipient];
            const Block& b = tree[e.block];
            if (rec_.prism) learn_links(m, e.block);
            if (b.height > tree[m.tip[b.chain]].height) m.tip[b.chain] = e.block;
        }
    }

    void learn_links(MinerState& m, BlockId id)
    {
        const BlockTree& tree = rec_.tree;
        const Block& b = tree[id];
        if (m.referenced.size() < tree.size()) m.referenced.resize(tree.size(), 0);
        if (b.chain == 0) {
            if (m.first_at_level.size() <= b.height) m.first_at_level.resize(b.height + 1, kNoBlock);
            if (m.first_at_level[b.height] == kNoBlock) m.first_at_level[b.height] = id;
        }
        if (!m.referenced[id]) m.unref.push_back(id);
        tree.for_each_link(id, true, [&](BlockId l) { m.referenced[l] = 1; });
    }

    void record()
    {
        const std::uint32_t C = rec_.chains;
        ViewRound v;
        v.miner_class.resize(miners_.size());
        for (std::size_t i = 0; i < miners_.size(); ++i) {
            const auto& tip = miners_[i].tip;
            const std::uint32_t classes = v.classes(C);
            std::uint32_t cls = 0;
            for (; cls < classes; ++cls)
                if (std::equal(tip.begin(), tip.end(), v.class_tips.begin() + std::ptrdiff_t(cls) * C)) break;
            if (cls == classes) v.class_tips.insert(v.class_tips.end(), tip.begin(), tip.end());
            v.miner_class[i] = static_cast<std::uint16_t>(cls);
        }
        rec_.rounds.push_back(std::move(v));
    }

    void mine_honest()
    {
        const std::uint32_t H = honest_miners();
        std::vector<BlockId> fresh;
        for (std::uint32_t j = 0; j < rec_.chains; ++j) {
            const std::uint32_t h = rec_.trace.h(j, round_);
            for (std::uint32_t k = 0; k < h; ++k) {
                const auto pick = k + std::uint32_t(assign_rng_.below(H - k));
                std::swap(perm_[k], perm_[pick]);
                fresh.push_back(honest_block(perm_[k], j));
            }
        }
        // Adversary chooses delays only after seeing every honest block of the round.
        for (BlockId id : fresh) {
            const DelayPolicy policy = adversary_.honest_delay(rec_.tree[id], *this);
            if (policy.kind == DelayPolicy::Kind::adversarial) {
                if (policy.offsets.size() != miners_.size()) throw AdversaryViolation("delay policy size mismatch");
                for (auto o : policy.offsets)
                    if (o < 1 || o > rec_.params.T) throw AdversaryViolation("delivery outside the delay window");
            }
            broadcast(id, rec_.tree[id].miner, policy);
        }
    }

    BlockId honest_block(std::uint32_t miner, std::uint32_t chain)
    {
        MinerState& m = miners_[miner];
        Block b;
        b.chain = chain;
        b.parent = m.tip[chain];
        b.kind = MinerKind::honest;
        b.miner = std::int32_t(miner);
        b.mined_round = round_;
        if (rec_.prism) {
            const BlockTree& tree = rec_.tree;
            if (chain == 0) {
                std::vector<BlockId> live;
                for (BlockId u : m.unref)
                    if (!m.referenced[u]) live.push_back(u);
                m.unref = live;
                for (BlockId u : live)
                    if (u != b.parent) b.refs.push_back(u);
                std::sort(b.refs.begin(), b.refs.end());
            } else {
                const std::uint32_t top = tree[m.tip[0]].height;
                for (std::uint32_t level = 1; level <= top; ++level)
                    if (rec_.counted_vote(b.parent, level) == kNoBlock)
                        b.votes.push_back({level, m.first_at_level[level]});
            }
            ++next_token_;
            b.payload.push_back({next_token_, next_token_});
        }
        return add_block(std::move(b));
    }

    void finish()
    {
        const std::uint32_t T = rec_.params.T;
        for (std::uint32_t j = 0; j < rec_.chains; ++j) {
            const ChainIndex index(rec_.trace, j, T);
            std::vector<std::uint8_t> u(rec_.params.horizon), iso(rec_.params.horizon);
            for (std::int64_t r = 1; r <= rec_.params.horizon; ++r) {
                u[r - 1] = index.is_unique(r);
                iso[r - 1] = index.is_doubly_isolated(r);
            }
            rec_.unique_round.push_back(std::move(u));
            rec_.isolated_round.push_back(std::move(iso));
        }
        if (rec_.prism) {
            const BlockTree& tree = rec_.tree;
            rec_.first_level_round.assign(tree.max_height(0) + 1, 0);
            for (std::uint32_t l = 1; l <= tree.max_height(0); ++l) {
                std::int64_t first = std::numeric_limits<std::int64_t>::max();
                for (BlockId b : tree.at_height(0, l)) first = std::min(first, tree[b].mined_round);
                rec_.first_level_round[l] = first;
            }
        }
        rec_.adversary_successes = adversary_.successes();
    }

    SimRecord rec_;
    Adversary& adversary_;
    Network net_;
    CounterRng assign_rng_;
    CounterRng adv_rng_;
    std::vector<MinerState> miners_;
    std::vector<std::uint32_t> perm_;
    std::vector<std::uint32_t> budget_;
    std::vector<BlockId> public_tip_;
    std::int64_t round_ = 0;
    std::uint64_t next_token_ = 0;
};

DerivedParams derive_for(const ProtocolParams& params, RunOptions options)
{
    return options.unsafe ? derive_unchecked(params) : derive(params);
}

} // namespace

SimRecord run_with_trace(const ProtocolParams& params, Adversary& adversary, Trace trace, bool prism,
                         std::uint64_t trial, RunOptions options)
{
    const DerivedParams d = derive_for(params, options);
    Engine engine(params, d, adversary, std::move(trace), prism, trial);
    return engine.run();
}

SimRecord run(const ProtocolParams& params, Adversary& adversary, std::uint64_t trial, RunOptions options)
{
    derive_for(params, options);
    CounterRng rng(params.seed, trial, Substream::trace);
    return run_with_trace(params, adversary, sample_trace(params, rng, params.horizon, 1), false, trial, options);
}

PrismRecord run_prism(const ProtocolParams& params, Adversary& adversary, std::uint64_t trial, RunOptions options)
{
    derive_for(params, options);
    CounterRng rng(params.seed, trial, Substream::trace);
    return run_with_trace(params, adversary, sample_trace(params, rng, params.horizon, params.m + 1), true, trial,
                          options);
}

std::vector<BlockId> adopted_chain(const SimRecord& record, std::int32_t miner, std::int64_t round, std::uint32_t chain)
{
    return record.tree.chain(record.tip(round, miner, chain));
}

std::vector<BlockId> prefix_k(const std::vector<BlockId>& chain, std::uint32_t k)
{
    if (chain.size() <= k) return {chain.front()};
    return {chain.begin(), chain.end() - k};
}

bool assert_unique_block(const SimRecord& record, std::int64_t round, std::uint32_t chain)
{
    const BlockTree& tree = record.tree;
    BlockId mine = kNoBlock;
    for (std::size_t b = tree.chain_count(); b < tree.size(); ++b)
        if (tree[BlockId(b)].chain == chain && tree[BlockId(b)].honest() && tree[BlockId(b)].mined_round == round) {
            if (mine != kNoBlock) return false; // not a single-block round
            mine = BlockId(b);
        }
    if (mine == kNoBlock) return false;
    for (BlockId other : tree.at_height(chain, tree[mine].height))
        if (other != mine && tree[other].honest()) return false;
    return true;
}

} // namespace backbone
