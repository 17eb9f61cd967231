#include "backbone/block_tree.hpp"
#include "backbone/rng.hpp"

#include <doctest.h>

using namespace backbone;

namespace {

Block child(BlockId parent, std::int64_t round, std::uint32_t chain = 0)
{
    Block b;
    b.chain = chain;
    b.parent = parent;
    b.mined_round = round;
    return b;
}

} // namespace

TEST_CASE("block tree: genesis per chain")
{
    BlockTree tree(3);
    CHECK(tree.size() == 3);
    for (std::uint32_t j = 0; j < 3; ++j) {
        CHECK(tree.genesis(j) == j);
        CHECK(tree[j].height == 0);
        CHECK(tree[j].released());
        CHECK(tree[j].honest());
        CHECK(tree.max_height(j) == 0);
    }
    CHECK_THROWS_AS(BlockTree(0), TreeError);
}

TEST_CASE("block tree: skip-list ancestor matches a parent walk")
{
    BlockTree tree(1);
    CounterRng rng(7, 0, Substream::scratch);
    std::vector<BlockId> ids{0};
    for (int i = 0; i < 3000; ++i) {
        // Mostly extend recent blocks so the tree grows deep with some forks.
        const std::size_t back = rng.below(std::min<std::uint64_t>(ids.size(), 4));
        const BlockId parent = ids[ids.size() - 1 - back];
        ids.push_back(tree.add(child(parent, 1 + tree[parent].mined_round)));
    }
    for (int trial = 0; trial < 2000; ++trial) {
        const BlockId b = ids[rng.below(ids.size())];
        const std::uint32_t h = std::uint32_t(rng.below(tree[b].height + 1));
        BlockId walk = b;
        while (tree[walk].height > h) walk = tree[walk].parent;
        REQUIRE(tree.ancestor(b, h) == walk);
        CHECK(tree.is_ancestor(walk, b));
    }
    CHECK(tree.ancestor(ids.back(), tree[ids.back()].height + 1) == kNoBlock);
    const auto path = tree.chain(ids.back());
    CHECK(path.front() == 0);
    CHECK(path.back() == ids.back());
    for (std::size_t i = 1; i < path.size(); ++i) CHECK(tree[path[i]].parent == path[i - 1]);
}

TEST_CASE("block tree: structural validation")
{
    BlockTree tree(2);
    const BlockId a = tree.add(child(0, 2));
    CHECK(tree[a].height == 1);
    CHECK(tree.at_height(0, 1) == std::vector<BlockId>{a});
    CHECK_THROWS_AS(tree.add(child(a, 1)), TreeError);  // before its parent
    CHECK_THROWS_AS(tree.add(child(0, 0)), TreeError);  // round 0 is genesis only
    CHECK_THROWS_AS(tree.add(child(a, 3, 1)), TreeError); // parent on another chain
    CHECK_THROWS_AS(tree.add(child(99, 3)), TreeError);

    Block voter = child(1, 3, 1);
    voter.votes.push_back({1, a});
    const BlockId v = tree.add(voter);
    CHECK(tree[v].votes.size() == 1);

    Block bad_level = child(1, 3, 1);
    bad_level.votes.push_back({2, a});
    CHECK_THROWS_AS(tree.add(bad_level), TreeError);

    Block early_vote = child(1, 1, 1);
    early_vote.votes.push_back({1, a});
    CHECK_THROWS_AS(tree.add(early_vote), TreeError);

    Block voter_ref = child(1, 3, 1);
    voter_ref.refs.push_back(a);
    CHECK_THROWS_AS(tree.add(voter_ref), TreeError);

    Block proposer_vote = child(a, 3);
    proposer_vote.votes.push_back({1, a});
    CHECK_THROWS_AS(tree.add(proposer_vote), TreeError);

    Block proposer = child(a, 4);
    proposer.refs.push_back(v);
    const BlockId p = tree.add(proposer);
    std::vector<BlockId> links, refs;
    tree.for_each_link(p, false, [&](BlockId l) { links.push_back(l); });
    tree.for_each_link(v, true, [&](BlockId l) { refs.push_back(l); });
    CHECK(links == std::vector<BlockId>{a, v});
    CHECK(refs == std::vector<BlockId>{a}); // voter parent is not a reference link

    tree.set_broadcast(p, 4);
    CHECK_THROWS_AS(tree.set_broadcast(p, 5), TreeError);
}
