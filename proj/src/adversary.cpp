#include "backbone/adversary.hpp"

#include <algorithm>

namespace backbone {

DelayPolicy Adversary::honest_delay(const Block&, AdversaryContext&)
{
    return DelayPolicy::min_delay();
}

namespace {

// Highest broadcast block on a chain that was mined before the current round.
BlockId settled_public_tip(const AdversaryContext& ctx, std::uint32_t chain)
{
    const BlockTree& tree = ctx.tree();
    for (std::int64_t h = tree.max_height(chain); h >= 0; --h)
        for (BlockId b : tree.at_height(chain, std::uint32_t(h)))
            if (tree[b].released() && tree[b].mined_round < ctx.round()) return b;
    return tree.genesis(chain);
}

// Votes an honest voter would cast on top of `parent`, choosing among
// blocks the adversary may reference; `prefer` picks the candidate per level.
template <typename Prefer>
std::vector<Vote> fill_votes(AdversaryContext& ctx, BlockId parent, std::uint32_t top, Prefer prefer)
{
    const BlockTree& tree = ctx.tree();
    std::vector<Vote> votes;
    for (std::uint32_t level = 1; level <= top; ++level) {
        if (ctx.counted_vote(parent, level) != kNoBlock) continue;
        BlockId pick = kNoBlock;
        for (BlockId b : tree.at_height(0, level)) {
            const Block& blk = tree[b];
            if (blk.honest() && blk.mined_round >= ctx.round()) continue;
            if (pick == kNoBlock || prefer(b, pick)) pick = b;
        }
        if (pick != kNoBlock) votes.push_back({level, pick});
    }
    return votes;
}

class NullAdversary final : public Adversary {
public:
    std::string name() const override { return "null"; }

    void act(AdversaryContext& ctx) override
    {
        const std::uint32_t top = ctx.tree()[settled_public_tip(ctx, 0)].height;
        for (std::uint32_t j = 0; j < ctx.chains(); ++j) {
            const BlockId parent = settled_public_tip(ctx, j);
            while (ctx.budget(j) > 0) {
                MineRequest req;
                req.chain = j;
                req.parent = parent;
                if (j != 0) req.votes = fill_votes(ctx, parent, top, [](BlockId a, BlockId b) { return a < b; });
                ctx.release(ctx.mine(req), DelayPolicy::min_delay());
            }
        }
    }
};

class PrivateFork final : public Adversary {
public:
    PrivateFork(std::uint32_t depth, std::uint32_t give_up) : depth_(depth), give_up_(give_up) {}

    std::string name() const override { return "private_fork"; }
    std::uint64_t successes() const override { return successes_; }

    void act(AdversaryContext& ctx) override
    {
        const BlockTree& tree = ctx.tree();
        if (!active_) {
            base_ = settled_public_tip(ctx, 0);
            tip_ = base_;
            active_ = true;
        }
        while (ctx.budget(0) > 0) {
            MineRequest req;
            req.chain = 0;
            req.parent = tip_;
            tip_ = ctx.mine(req);
        }
        const std::uint32_t pub = tree[ctx.public_tip(0)].height;
        const std::uint32_t mine = tree[tip_].height;
        const std::uint32_t base = tree[base_].height;
        if (mine > pub && pub >= base + depth_) {
            ctx.release(tip_, DelayPolicy::min_delay());
            ++successes_;
            active_ = false;
        } else if (pub > mine + give_up_) {
            active_ = false;
        }
    }

private:
    std::uint32_t depth_;
    std::uint32_t give_up_;
    bool active_ = false;
    BlockId base_ = kNoBlock;
    BlockId tip_ = kNoBlock;
    std::uint64_t successes_ = 0;
};

class LeaderCensor final : public Adversary {
public:
    std::string name() const override { return "leader_censor"; }

    void act(AdversaryContext& ctx) override
    {
        const BlockTree& tree = ctx.tree();
        // Claim the next proposer levels first, without extra references.
        while (ctx.budget(0) > 0) {
            MineRequest req;
            req.chain = 0;
            req.parent = ctx.minable_tip(0);
            ctx.release(ctx.mine(req), DelayPolicy::min_delay());
        }
        const std::uint32_t top = tree[ctx.minable_tip(0)].height;
        auto prefer = [&tree](BlockId a, BlockId b) {
            const bool aa = !tree[a].honest(), ab = !tree[b].honest();
            return aa != ab ? aa : a < b;
        };
        for (std::uint32_t j = 1; j < ctx.chains(); ++j) {
            while (ctx.budget(j) > 0) {
                MineRequest req;
                req.chain = j;
                req.parent = ctx.minable_tip(j);
                req.votes = fill_votes(ctx, req.parent, top, prefer);
                ctx.release(ctx.mine(req), DelayPolicy::min_delay());
            }
        }
    }
};

class SplitView final : public Adversary {
public:
    std::string name() const override { return "split_view"; }

    DelayPolicy honest_delay(const Block& block, AdversaryContext& ctx) override
    {
        return split(ctx, block.miner % 2);
    }

    void act(AdversaryContext& ctx) override
    {
        if (ctx.budget(0) == 0) return;
        const BlockTree& tree = ctx.tree();
        // Feed the group whose view is currently shorter.
        std::int32_t low_miner = 0;
        for (std::int32_t i = 1; i < std::int32_t(ctx.honest_miners()); ++i)
            if (tree[ctx.honest_tip(i, 0)].height < tree[ctx.honest_tip(low_miner, 0)].height) low_miner = i;
        BlockId parent = ctx.honest_tip(low_miner, 0);
        while (ctx.budget(0) > 0) {
            MineRequest req;
            req.chain = 0;
            req.parent = parent;
            parent = ctx.mine(req);
        }
        ctx.release(parent, split(ctx, low_miner % 2));
    }

private:
    static DelayPolicy split(const AdversaryContext& ctx, std::int32_t group)
    {
        std::vector<std::uint32_t> offsets(ctx.honest_miners());
        for (std::size_t i = 0; i < offsets.size(); ++i) offsets[i] = std::int32_t(i % 2) == group ? 1 : ctx.T();
        return DelayPolicy::per_recipient(std::move(offsets));
    }
};

} // namespace

std::unique_ptr<Adversary> null_adversary() { return std::make_unique<NullAdversary>(); }

std::unique_ptr<Adversary> private_fork(std::uint32_t release_depth, std::uint32_t give_up)
{
    if (release_depth < 1) throw std::invalid_argument("private_fork: release depth must be at least 1");
    return std::make_unique<PrivateFork>(release_depth, give_up);
}

std::unique_ptr<Adversary> leader_censor() { return std::make_unique<LeaderCensor>(); }

std::unique_ptr<Adversary> split_view() { return std::make_unique<SplitView>(); }

std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec)
{
    if (spec.kind == "null") return null_adversary();
    if (spec.kind == "private_fork") return private_fork(spec.release_depth, spec.give_up);
    if (spec.kind == "leader_censor") return leader_censor();
    if (spec.kind == "split_view") return split_view();
    throw std::invalid_argument("unknown adversary: " + spec.kind);
}

} // namespace backbone
