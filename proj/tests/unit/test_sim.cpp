#include "backbone/sim.hpp"
#include "backbone/trace.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <set>

using namespace backbone;
using fixture::make;

namespace {

void check_round_accounting(const SimRecord& rec)
{
    const BlockTree& tree = rec.tree;
    std::vector<std::vector<std::uint32_t>> honest(rec.chains, std::vector<std::uint32_t>(rec.params.horizon + 1));
    auto adversarial = honest;
    std::set<std::pair<std::int64_t, std::int32_t>> miner_round;
    for (BlockId b = tree.chain_count(); b < tree.size(); ++b) {
        const Block& blk = tree[b];
        REQUIRE(blk.mined_round >= tree[blk.parent].mined_round);
        REQUIRE(blk.mined_round <= rec.params.horizon);
        if (blk.honest()) {
            ++honest[blk.chain][blk.mined_round];
            REQUIRE(blk.broadcast_round == blk.mined_round);
            // Distinct honest miners within one chain and round.
            REQUIRE(miner_round.insert({blk.mined_round * rec.chains + blk.chain, blk.miner}).second);
        } else {
            ++adversarial[blk.chain][blk.mined_round];
        }
    }
    for (std::uint32_t j = 0; j < rec.chains; ++j)
        for (std::int64_t r = 1; r <= rec.params.horizon; ++r) {
            REQUIRE(honest[j][r] == rec.trace.h(j, r));
            REQUIRE(adversarial[j][r] <= rec.trace.z(j, r));
        }
}

void check_delivery_window(const SimRecord& rec)
{
    const BlockTree& tree = rec.tree;
    const std::uint32_t T = rec.params.T;
    for (BlockId b = tree.chain_count(); b < tree.size(); ++b) {
        const Block& blk = tree[b];
        for (std::int32_t i = 0; i < std::int32_t(rec.honest_miners()); ++i) {
            const auto at = rec.views.planned(b, i);
            if (!blk.released()) {
                REQUIRE(at == kNever);
                continue;
            }
            REQUIRE(std::int64_t(at) >= blk.broadcast_round + 1);
            REQUIRE(std::int64_t(at) <= blk.broadcast_round + T);
            if (blk.miner == i) REQUIRE(std::int64_t(at) == blk.broadcast_round + 1);
            tree.for_each_link(b, false, [&](BlockId l) { REQUIRE(rec.views.planned(l, i) <= at); });
        }
    }
}

// Every honest tip is the highest block its miner knows, and its ancestry is known.
void check_longest_rule(const SimRecord& rec, std::int64_t step)
{
    const BlockTree& tree = rec.tree;
    for (std::int64_t r = 1; r <= rec.last_round(); r += step)
        for (std::int32_t i = 0; i < std::int32_t(rec.honest_miners()); ++i)
            for (std::uint32_t j = 0; j < rec.chains; ++j) {
                const BlockId tip = rec.tip(r, i, j);
                std::uint32_t best = 0;
                for (BlockId b = tree.chain_count(); b < tree.size(); ++b)
                    if (tree[b].chain == j && rec.views.knows(b, i, r)) best = std::max(best, tree[b].height);
                REQUIRE(tree[tip].height == best);
                for (BlockId a : tree.chain(tip)) REQUIRE(rec.views.knows(a, i, r));
            }
}

} // namespace

TEST_CASE("prefix_k and adopted_chain")
{
    const std::vector<BlockId> chain{0, 4, 5, 9, 11, 12, 13, 20, 21, 22};
    CHECK(prefix_k(chain, 0) == chain);
    CHECK(prefix_k(chain, 3) == std::vector<BlockId>{0, 4, 5, 9, 11, 12, 13});
    CHECK(prefix_k(chain, 10) == std::vector<BlockId>{0});
    CHECK(prefix_k(chain, 50) == std::vector<BlockId>{0});

    auto adv = null_adversary();
    const auto rec = run(make(10, 2, 0.1, 200), *adv);
    const auto c = adopted_chain(rec, 3, 150);
    CHECK(c.front() == 0);
    CHECK(c.back() == rec.tip(150, 3, 0));
}

TEST_CASE("sim: accounting, delivery window and longest-chain adoption")
{
    for (std::string kind : {"null", "private_fork", "split_view"}) {
        for (std::uint32_t T : {1u, 3u}) {
            CAPTURE(kind);
            CAPTURE(T);
            AdversarySpec spec;
            spec.kind = kind;
            spec.release_depth = 2;
            auto adv = make_adversary(spec);
            const auto rec = run(make(12, 4, 0.3, 400, T, 5), *adv);
            CHECK(rec.rounds.size() == 401);
            check_round_accounting(rec);
            check_delivery_window(rec);
            check_longest_rule(rec, 7);
        }
    }
}

TEST_CASE("sim: identical inputs give identical records")
{
    auto a1 = private_fork(3, 10);
    auto a2 = private_fork(3, 10);
    const auto r1 = run(make(20, 6, 0.2, 500, 2, 99), *a1, 4);
    const auto r2 = run(make(20, 6, 0.2, 500, 2, 99), *a2, 4);
    REQUIRE(r1.tree.size() == r2.tree.size());
    for (BlockId b = 0; b < r1.tree.size(); ++b) {
        CHECK(r1.tree[b].parent == r2.tree[b].parent);
        CHECK(r1.tree[b].broadcast_round == r2.tree[b].broadcast_round);
        CHECK(r1.tree[b].miner == r2.tree[b].miner);
    }
    CHECK(r1.views.table() == r2.views.table());
    auto a3 = private_fork(3, 10);
    const auto r3 = run(make(20, 6, 0.2, 500, 2, 99), *a3, 5);
    CHECK_FALSE(r3.trace == r1.trace);
}

TEST_CASE("sim: synchronous honest chains have equal length every round")
{
    for (std::string kind : {"null", "private_fork"}) {
        CAPTURE(kind);
        AdversarySpec spec;
        spec.kind = kind;
        spec.release_depth = 1;
        auto adv = make_adversary(spec);
        const auto rec = run(make(100, 25, 0.1, 3000, 1, 11), *adv);
        for (std::int64_t r = 1; r <= rec.last_round(); ++r)
            REQUIRE(fixture::min_height(rec, r) == fixture::max_height(rec, r));
    }
}

TEST_CASE("sim: synchronous growth is at least the count of successful rounds")
{
    for (std::string kind : {"null", "private_fork"}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            AdversarySpec spec;
            spec.kind = kind;
            auto adv = make_adversary(spec);
            const auto rec = run(make(100, 25, 0.1, 2000, 1, seed), *adv);
            const ChainIndex index(rec.trace, 0, 1);
            std::vector<std::uint32_t> lo(rec.last_round() + 1), hi(lo);
            for (std::int64_t r = 1; r <= rec.last_round(); ++r) {
                lo[r] = fixture::min_height(rec, r);
                hi[r] = fixture::max_height(rec, r);
            }
            for (std::int64_t s = 1; s < rec.last_round(); s += 13)
                for (std::int64_t r = s + 1; r <= rec.last_round(); r += 17)
                    REQUIRE(lo[r] >= hi[s] + index.X(s, r));
            CHECK(lo[rec.last_round()] >= index.X(1, rec.last_round()));
        }
    }
}

TEST_CASE("sim: bounded-delay growth counts left-isolated rounds")
{
    for (std::string kind : {"null", "split_view"}) {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            CAPTURE(kind);
            const std::uint32_t T = 5;
            AdversarySpec spec;
            spec.kind = kind;
            auto adv = make_adversary(spec);
            const auto rec = run(make(100, 25, 0.05, 2000, T, seed), *adv);
            const ChainIndex index(rec.trace, 0, T);
            std::vector<std::uint32_t> lo(rec.last_round() + 1);
            for (std::int64_t r = 1; r <= rec.last_round(); ++r) lo[r] = fixture::min_height(rec, r);
            std::int64_t checked = 0;
            for (std::int64_t s = T; s < rec.last_round(); s += 7)
                for (std::int64_t r = s + T; r <= rec.last_round(); r += 11) {
                    REQUIRE(lo[r] >= lo[s] + index.Xp(s, r - T + 1));
                    ++checked;
                }
            CHECK(checked > 1000);
        }
    }
}

TEST_CASE("sim: unique honest block at isolated heights")
{
    struct Case {
        std::string kind;
        std::uint32_t T;
    };
    for (const Case& c : {Case{"private_fork", 1}, Case{"null", 1}, Case{"split_view", 4}, Case{"private_fork", 4}}) {
        CAPTURE(c.kind);
        std::int64_t checked = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            AdversarySpec spec;
            spec.kind = c.kind;
            spec.release_depth = 2;
            auto adv = make_adversary(spec);
            const auto rec = run(make(40, 12, 0.08, 1000, c.T, seed), *adv);
            const auto& marks = c.T == 1 ? rec.unique_round[0] : rec.isolated_round[0];
            for (std::int64_t r = 1; r <= rec.params.horizon; ++r)
                if (marks[r - 1]) {
                    REQUIRE(assert_unique_block(rec, r));
                    ++checked;
                }
        }
        CHECK(checked > 100);
    }
}

TEST_CASE("sim: unique-block check detects a planted honest sibling")
{
    auto adv = null_adversary();
    auto rec = run(make(10, 2, 0.1, 300, 1, 3), *adv);
    std::int64_t round = 0;
    for (std::int64_t r = 1; r <= 300 && !round; ++r)
        if (rec.unique_round[0][r - 1]) round = r;
    REQUIRE(round > 0);
    REQUIRE(assert_unique_block(rec, round));
    BlockId mine = kNoBlock;
    for (BlockId b = 1; b < rec.tree.size(); ++b)
        if (rec.tree[b].mined_round == round) mine = b;
    Block planted;
    planted.parent = rec.tree[mine].parent;
    planted.mined_round = round + 5;
    planted.miner = 0;
    rec.tree.add(planted);
    CHECK_FALSE(assert_unique_block(rec, round));
}

TEST_CASE("sim: own block wins a same-height tie")
{
    ProtocolParams pp = make(6, 0, 0.1, 4);
    Trace trace(1, 4, 6, 0);
    trace.set(0, 1, 2, 0);
    auto adv = null_adversary();
    const auto rec = run_with_trace(pp, *adv, trace, false);
    REQUIRE(rec.tree.size() == 3);
    for (std::int32_t i = 0; i < 6; ++i) {
        const BlockId tip = rec.tip(2, i, 0);
        if (rec.tree[1].miner == i) CHECK(tip == 1);
        else if (rec.tree[2].miner == i) CHECK(tip == 2);
        else CHECK(tip == 1); // first received, smaller id
    }
    CHECK(rec.at(2).classes(1) == 2);
}

TEST_CASE("sim: split view keeps honest tips apart longer than the null adversary")
{
    std::int64_t split_rounds = 0, null_rounds = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto pp = make(40, 10, 0.05, 2000, 5, seed);
        auto s = split_view();
        auto n = null_adversary();
        const auto rs = run(pp, *s);
        const auto rn = run(pp, *n);
        for (std::int64_t r = 1; r <= rs.last_round(); ++r) {
            split_rounds += fixture::min_height(rs, r) != fixture::max_height(rs, r) || rs.at(r).classes(1) > 1;
            null_rounds += fixture::min_height(rn, r) != fixture::max_height(rn, r) || rn.at(r).classes(1) > 1;
        }
    }
    MESSAGE("divergent rounds: split " << split_rounds << " null " << null_rounds);
    CHECK(split_rounds > null_rounds);
}

TEST_CASE("sim: parameter checks")
{
    auto adv = null_adversary();
    CHECK_THROWS_AS(run(make(10, 5, 0.1, 100), *adv), ParamError);
    CHECK_NOTHROW(run(make(10, 6, 0.1, 100), *adv, 0, RunOptions{true}));
    Trace wrong(1, 50, 8, 2);
    CHECK_THROWS_AS(run_with_trace(make(10, 2, 0.1, 100), *adv, wrong, false), TraceError);
}
