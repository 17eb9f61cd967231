#include "backbone/suites.hpp"

#include "backbone/prism.hpp"
#include "backbone/rng.hpp"
#include "backbone/trace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

namespace backbone {

ImplicationReport& SuiteReport::get(const std::string& theorem)
{
    for (auto& r : reports)
        if (r.theorem == theorem) return r;
    reports.push_back({});
    reports.back().theorem = theorem;
    return reports.back();
}

const ImplicationReport* SuiteReport::find(const std::string& theorem) const
{
    for (const auto& r : reports)
        if (r.theorem == theorem) return &r;
    return nullptr;
}

std::uint64_t SuiteReport::violations() const
{
    std::uint64_t n = 0;
    for (const auto& r : reports) n += r.violations;
    return n;
}

void SuiteReport::merge(const SuiteReport& other)
{
    for (const auto& r : other.reports) get(r.theorem).merge(r);
}

namespace {

constexpr double kSlack = 1e-9;

// Smallest integer k with k >= x (or k > x when strict), robust to x landing
// a hair above an integer through rounding.
std::uint32_t depth_threshold(double x, bool strict)
{
    if (strict) return std::uint32_t(std::floor(x + kSlack)) + 1;
    return std::uint32_t(std::max(0.0, std::ceil(x - kSlack)));
}

BlockId lca(const BlockTree& tree, BlockId a, BlockId b)
{
    if (a == kNoBlock) return b;
    if (b == kNoBlock) return a;
    const std::uint32_t h = std::min(tree[a].height, tree[b].height);
    a = tree.ancestor(a, h);
    b = tree.ancestor(b, h);
    if (a == b) return a;
    std::uint32_t lo = 0, hi = h; // equal at lo, different at hi
    while (hi - lo > 1) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        if (tree.ancestor(a, mid) == tree.ancestor(b, mid)) lo = mid;
        else hi = mid;
    }
    return tree.ancestor(a, lo);
}

std::string fingerprint(const SimRecord& rec, std::uint32_t chain, std::int64_t s, std::int64_t r, std::int64_t k,
                        const std::string& extra = "")
{
    std::ostringstream os;
    os << "seed=" << rec.params.seed << " trial=" << rec.trial << " adversary=" << rec.adversary << " chain=" << chain
       << " s=" << s << " r=" << r;
    if (k >= 0) os << " k=" << k;
    if (!extra.empty()) os << ' ' << extra;
    return os.str();
}

CounterRng point_rng(const SimRecord& rec, std::uint64_t salt)
{
    const CounterRng base(rec.params.seed, rec.trial, Substream::scratch);
    return CounterRng::from_key(mix64(base.key() ^ mix64(salt)));
}

// Lattice pairs with spacing `stride`, then random pairs, all with
// lo <= s < r <= hi.
std::vector<std::pair<std::int64_t, std::int64_t>> sample_points(std::int64_t lo, std::int64_t hi, const SuiteOptions& opt,
                                                                 CounterRng rng)
{
    std::vector<std::pair<std::int64_t, std::int64_t>> pts;
    if (hi <= lo) return pts;
    const std::int64_t stride = std::max<std::int64_t>(opt.stride, 1);
    for (std::int64_t s = lo; s < hi; s += stride) {
        for (std::int64_t r = s + stride; r <= hi; r += stride) pts.push_back({s, r});
        pts.push_back({s, hi});
    }
    const std::uint64_t width = std::uint64_t(hi - lo + 1);
    for (std::uint32_t i = 0; i < opt.random_points; ++i) {
        std::int64_t a = lo + std::int64_t(rng.below(width));
        std::int64_t b = lo + std::int64_t(rng.below(width));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        pts.push_back({a, b});
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Per-chain tables shared by the checks.
struct ChainData {
    std::uint32_t chain = 0;
    ChainIndex index;
    std::unique_ptr<TypicalEvents> events;
    std::vector<std::uint32_t> min_len, max_len; // by round, index r
    std::vector<BlockId> suffix_lca;             // LCA of all honest tips over rounds >= r

    ChainData(const SimRecord& rec, std::uint32_t j)
        : chain(j), index(rec.trace, j, rec.params.T)
    {
        const std::int64_t rounds = rec.trace.rounds();
        const bool sync = rec.params.T == 1;
        events = std::make_unique<TypicalEvents>(index, rec.derived, sync ? TypicalEvents::Kind::E : TypicalEvents::Kind::F,
                                                 sync ? rounds + 1 : rounds - std::int64_t(rec.params.T) + 2);
        const std::int64_t last = rec.last_round();
        min_len.assign(last + 1, 0);
        max_len.assign(last + 1, 0);
        suffix_lca.assign(last + 2, kNoBlock);
        for (std::int64_t r = 1; r <= last; ++r) {
            const ViewRound& v = rec.at(r);
            std::uint32_t lo = UINT32_MAX, hi = 0;
            for (std::uint32_t c = 0; c < v.classes(rec.chains); ++c) {
                const std::uint32_t h = rec.tree[v.class_tips[std::size_t(c) * rec.chains + j]].height;
                lo = std::min(lo, h);
                hi = std::max(hi, h);
            }
            min_len[r] = lo;
            max_len[r] = hi;
        }
        for (std::int64_t r = last; r >= 1; --r) {
            const ViewRound& v = rec.at(r);
            BlockId acc = suffix_lca[r + 1];
            for (std::uint32_t c = 0; c < v.classes(rec.chains); ++c)
                acc = lca(rec.tree, acc, v.class_tips[std::size_t(c) * rec.chains + j]);
            suffix_lca[r] = acc;
        }
    }

    bool premise(std::int64_t s, std::int64_t r) const
    {
        if (s < events->first_start() || r > events->end_limit() || s >= r) return false;
        return events->holds(s, r);
    }
};

// Honest blocks on the path from genesis, inclusive; genesis counts.
std::vector<std::uint32_t> honest_depths(const BlockTree& tree)
{
    std::vector<std::uint32_t> out(tree.size(), 0);
    for (BlockId b = 0; b < tree.size(); ++b)
        out[b] = (tree[b].parent == kNoBlock ? 0 : out[tree[b].parent]) + (tree[b].honest() ? 1 : 0);
    return out;
}

// Lowest honest ancestor-or-self.
std::vector<BlockId> last_honest(const BlockTree& tree)
{
    std::vector<BlockId> out(tree.size(), kNoBlock);
    for (BlockId b = 0; b < tree.size(); ++b)
        out[b] = tree[b].honest() ? b : out[tree[b].parent];
    return out;
}

void run_chain(const SimRecord& rec, const ChainData& cd, const std::vector<std::uint32_t>& hdepth,
               const SuiteOptions& opt, const std::string& prefix, bool full, SuiteReport& out)
{
    const BlockTree& tree = rec.tree;
    const DerivedParams& d = rec.derived;
    const std::uint32_t T = rec.params.T;
    const bool sync = T == 1;
    const std::uint32_t j = cd.chain;
    const double q = d.q;
    const double xi = d.xi;
    const std::int64_t last = rec.last_round();
    const double min_span = sync ? 0.0 : 2.0 / q;

    ImplicationReport& growth = out.get(prefix + "growth");
    ImplicationReport& age = out.get(prefix + "age");
    ImplicationReport* quality = full ? &out.get(prefix + "quality") : nullptr;
    ImplicationReport* prefix_rep = full ? &out.get(prefix + "common_prefix") : nullptr;
    ImplicationReport& unique = out.get(prefix + "unique_block");

    const double rate = sync ? (1 - xi / 6) * q : (1 - xi / 10) * std::pow(1 - q, T) * q;
    const std::int64_t lo = sync ? 1 : T;
    const auto pts = sample_points(lo, last, opt, point_rng(rec, j));

    for (const auto& [s, r] : pts) {
        const std::int64_t span = r - s;
        const bool wide = sync || double(span) > min_span;
        const std::uint32_t classes = rec.at(r).classes(rec.chains);
        auto tip_of = [&](std::uint32_t c) { return rec.at(r).class_tips[std::size_t(c) * rec.chains + j]; };

        // Growth over {s..r}: every honest length at r against the longest at s.
        {
            const bool held = wide && (sync ? cd.premise(s, r) : cd.premise(s, r - T));
            const double need = rate * double(span);
            growth.note(held, double(cd.min_len[r]) - double(cd.max_len[s]) >= need - kSlack, [&] {
                return fingerprint(rec, j, s, r, -1,
                                   "grew=" + std::to_string(std::int64_t(cd.min_len[r]) - cd.max_len[s]) +
                                       " need=" + std::to_string(need));
            });
        }

        const double x = 2 * q * double(span);
        const std::uint32_t k0 = depth_threshold(x, false);

        // Age of the k-deep block. Deeper blocks are older, so the threshold suffices.
        {
            const bool held = wide && cd.premise(s, r);
            bool ok = true;
            std::uint32_t bad = 0;
            if (held)
                for (std::uint32_t c = 0; c < classes && ok; ++c) {
                    const BlockId tip = tip_of(c);
                    const std::uint32_t h = tree[tip].height;
                    if (h <= k0) continue;
                    ok = tree[tree.ancestor(tip, h - k0)].mined_round < s;
                    bad = c;
                }
            age.note(held, ok, [&] { return fingerprint(rec, j, s, r, k0, "class=" + std::to_string(bad)); });
        }

        if (!full) continue;

        // Quality is not monotone in k; try the threshold and a few deeper values.
        {
            const bool held = wide && (sync ? cd.premise(s, r) : cd.premise(s, r - T));
            std::vector<std::uint32_t> ks{k0};
            for (std::uint32_t e : opt.extra_depths) ks.push_back(k0 + e);
            for (std::uint32_t k : ks) {
                if (k == 0) continue;
                bool ok = true;
                std::string detail;
                if (held)
                    for (std::uint32_t c = 0; c < classes && ok; ++c) {
                        const BlockId tip = tip_of(c);
                        const std::uint32_t h = tree[tip].height;
                        if (h < k) continue;
                        const std::uint32_t honest = hdepth[tip] - hdepth[tree.ancestor(tip, h - k)];
                        ok = double(honest) > xi / 2 * double(k) + kSlack;
                        if (!ok) detail = "class=" + std::to_string(c) + " honest=" + std::to_string(honest);
                    }
                quality->note(held, ok, [&] { return fingerprint(rec, j, s, r, k, detail); });
            }
        }

        // Common prefix: the k-deep block stays under every later honest tip.
        {
            const std::uint32_t k = depth_threshold(x, !sync);
            bool held;
            if (sync) held = cd.premise(s, r);
            else held = wide && s + T < r - std::int64_t(T) && cd.premise(s + T, r - T);
            bool ok = true;
            std::uint32_t bad = 0;
            if (held)
                for (std::uint32_t c = 0; c < classes && ok; ++c) {
                    const BlockId tip = tip_of(c);
                    const std::uint32_t h = tree[tip].height;
                    if (h <= k) continue;
                    ok = tree.is_ancestor(tree.ancestor(tip, h - k), cd.suffix_lca[r]);
                    bad = c;
                }
            prefix_rep->note(held, ok, [&] { return fingerprint(rec, j, s, r, k, "class=" + std::to_string(bad)); });
        }
    }

    // Unique (T = 1) or doubly isolated rounds: no other honest block shares the height.
    {
        std::vector<std::vector<BlockId>> honest_at(std::size_t(last) + 1);
        for (BlockId b = tree.chain_count(); b < tree.size(); ++b)
            if (tree[b].chain == j && tree[b].honest() && tree[b].mined_round <= last)
                honest_at[tree[b].mined_round].push_back(b);
        const auto& marks = sync ? rec.unique_round[j] : rec.isolated_round[j];
        for (std::int64_t u = 1; u <= std::int64_t(marks.size()); ++u) {
            if (!marks[u - 1]) continue;
            const bool held = sync || (u > std::int64_t(T) && u + T <= last);
            bool ok = honest_at[u].size() == 1;
            if (held && ok)
                for (BlockId other : tree.at_height(j, tree[honest_at[u][0]].height))
                    if (other != honest_at[u][0] && tree[other].honest()) ok = false;
            unique.note(held, ok, [&] { return fingerprint(rec, j, u, u, -1); });
        }
    }

    if (sync) {
        ImplicationReport& equal = out.get(prefix + "equal_length");
        for (std::int64_t r = 1; r <= last; ++r)
            equal.note(true, cd.min_len[r] == cd.max_len[r], [&] { return fingerprint(rec, j, r, r, -1); });
    }
}

} // namespace

SuiteReport chain_suite(const SimRecord& record, std::uint32_t chain, const SuiteOptions& options,
                        const std::string& prefix)
{
    if (record.derived.q <= 0) throw std::invalid_argument("suites need q > 0");
    SuiteReport out;
    const ChainData cd(record, chain);
    run_chain(record, cd, honest_depths(record.tree), options, prefix, true, out);
    return out;
}

SuiteReport bitcoin_suite(const SimRecord& record, const SuiteOptions& options)
{
    return chain_suite(record, 0, options);
}

ImplicationReport proposer_quality_check(const SimRecord& record, const SuiteOptions& options)
{
    if (!record.prism) throw std::invalid_argument("proposer quality needs a Prism record");
    ImplicationReport rep;
    rep.theorem = "proposer_quality";
    const BlockTree& tree = record.tree;
    const DerivedParams& d = record.derived;
    const std::uint32_t T = record.params.T;
    const bool sync = T == 1;
    const ChainData cd(record, 0);
    const auto pts = sample_points(sync ? 1 : T, record.last_round(), options, point_rng(record, 0x51ed));

    std::vector<std::pair<std::int64_t, std::int64_t>> by_r(pts.begin(), pts.end());
    std::sort(by_r.begin(), by_r.end(), [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
    std::int64_t cached = -1;
    RoundSequences views;
    for (const auto& [s, r] : by_r) {
        const std::int64_t span = r - s;
        const bool held = sync ? cd.premise(s, r) : double(span) > 2.0 / d.q && cd.premise(s, r - T);
        const std::uint32_t k0 = depth_threshold(2 * d.q * double(span), false);
        std::vector<std::uint32_t> ks{k0};
        for (std::uint32_t e : options.extra_depths) ks.push_back(k0 + e);
        if (held && cached != r) {
            views = view_sequences(record, r);
            cached = r;
        }
        for (std::uint32_t k : ks) {
            if (k == 0) continue;
            bool ok = true;
            std::string detail;
            if (held)
                for (const LeaderSequence& seq : views.distinct) {
                    const std::uint32_t top = seq.levels();
                    if (top < k) continue;
                    std::uint32_t honest = 0;
                    for (std::uint32_t l = top - k + 1; l <= top; ++l) honest += tree[seq.at(l)].honest();
                    if (double(honest) <= d.xi / 2 * double(k) + kSlack) {
                        ok = false;
                        detail = "levels=" + std::to_string(top) + " honest=" + std::to_string(honest);
                        break;
                    }
                }
            rep.note(held, ok, [&] { return fingerprint(record, 0, s, r, k, detail); });
        }
    }
    return rep;
}

ImplicationReport leader_inclusion_scan(const SimRecord& record, const SuiteOptions& options)
{
    if (!record.prism) throw std::invalid_argument("leader inclusion needs a Prism record");
    ImplicationReport rep;
    rep.theorem = "leader_inclusion";
    const BlockTree& tree = record.tree;
    const std::int64_t T = record.params.T;

    // Honest payload blocks ordered by broadcast round.
    std::vector<BlockId> payload;
    for (BlockId b = tree.chain_count(); b < tree.size(); ++b)
        if (tree[b].honest() && !tree[b].payload.empty() && tree[b].released()) payload.push_back(b);
    std::sort(payload.begin(), payload.end(), [&](BlockId a, BlockId b) {
        return std::tie(tree[a].broadcast_round, a) < std::tie(tree[b].broadcast_round, b);
    });

    std::vector<std::int64_t> rounds;
    const std::int64_t stride = std::max<std::int64_t>(options.inclusion_stride, 1);
    for (std::int64_t r = stride; r < record.last_round(); r += stride) rounds.push_back(r);
    rounds.push_back(record.last_round());

    std::vector<std::uint32_t> prefix_max(payload.size());
    for (std::int64_t r : rounds) {
        const RoundSequences views = view_sequences(record, r);
        for (std::size_t v = 0; v < views.distinct.size(); ++v) {
            const LeaderSequence& seq = views.distinct[v];
            const std::int32_t miner = std::int32_t(
                std::find(views.of_miner.begin(), views.of_miner.end(), std::uint32_t(v)) - views.of_miner.begin());
            std::uint32_t complete = 0;
            const auto epoch = epoch_map(PrismView(record, r, miner), seq, &complete);
            std::uint32_t run = 0;
            for (std::size_t i = 0; i < payload.size(); ++i) {
                run = std::max(run, epoch[payload[i]]);
                prefix_max[i] = run;
            }
            for (std::uint32_t l = 1; l <= seq.levels(); ++l) {
                const Block& leader = tree[seq.at(l)];
                const bool held = leader.honest();
                bool ok = true;
                std::int64_t cutoff = leader.mined_round - T;
                if (held) {
                    // Payload blocks broadcast by the cutoff.
                    const auto it = std::upper_bound(payload.begin(), payload.end(), cutoff, [&](std::int64_t c, BlockId b) {
                        return c < tree[b].broadcast_round;
                    });
                    const std::size_t n = std::size_t(it - payload.begin());
                    ok = l <= complete && (n == 0 || prefix_max[n - 1] <= l);
                }
                rep.note(held, ok, [&] {
                    return fingerprint(record, 0, cutoff, r, -1, "level=" + std::to_string(l) + " miner=" + std::to_string(miner));
                });
            }
        }
    }
    return rep;
}

ImplicationReport fix_all_check(const SimRecord& record, const SuiteOptions& options)
{
    if (!record.prism) throw std::invalid_argument("fix-all needs a Prism record");
    ImplicationReport rep;
    rep.theorem = "fix_all";
    const BlockTree& tree = record.tree;
    const DerivedParams& d = record.derived;
    const std::uint32_t T = record.params.T;
    const bool sync = T == 1;
    const std::uint32_t m = record.chains - 1;
    const std::int64_t last = record.last_round();
    const auto& R = record.first_level_round; // R[l], level l >= 1
    const std::uint32_t max_level = R.empty() ? 0 : std::uint32_t(R.size() - 1);
    if (max_level == 0 || m == 0) return rep;

    std::vector<std::unique_ptr<ChainData>> chains;
    for (std::uint32_t j = 1; j <= m; ++j) chains.push_back(std::make_unique<ChainData>(record, j));
    const auto honest_below = last_honest(tree);
    // First level missing from each voter block's counted votes.
    std::vector<std::uint32_t> first_missing(tree.size(), 1);
    for (BlockId b = 0; b < tree.size(); ++b) {
        const auto& map = record.votemap[b];
        std::uint32_t l = 1;
        while (l < map.size() && map[l] != kNoBlock) ++l;
        first_missing[b] = l;
    }

    // Latest mined round, over chains, of the lowest honest block at least k
    // deep in some honest view; the minimum over chains.
    auto deep_honest_round = [&](std::int64_t r, std::uint32_t k) {
        const ViewRound& v = record.at(r);
        std::int64_t worst = INT64_MAX;
        for (std::uint32_t j = 1; j <= m; ++j) {
            std::int64_t best = 0;
            for (std::uint32_t c = 0; c < v.classes(record.chains); ++c) {
                const BlockId tip = v.class_tips[std::size_t(c) * record.chains + j];
                const std::uint32_t h = tree[tip].height;
                if (h < k) continue;
                best = std::max(best, tree[honest_below[tree.ancestor(tip, h - k)]].mined_round);
            }
            worst = std::min(worst, best);
        }
        return worst;
    };

    auto prefix_of = [](const LeaderSequence& seq, std::uint32_t l) {
        LeaderSequence out = seq;
        out.leaders.resize(std::min(l, seq.levels()));
        out.votes.resize(out.leaders.size());
        return out;
    };

    std::map<std::int64_t, RoundSequences> slow_cache;
    auto sequences_at = [&](std::int64_t r) -> const RoundSequences& {
        auto it = slow_cache.find(r);
        if (it == slow_cache.end()) it = slow_cache.emplace(r, view_sequences(record, r)).first;
        return it->second;
    };

    for (std::uint32_t k : options.fix_all_depths) {
        if (k == 0 || (!sync && k < 5)) {
            rep.scanned += max_level;
            continue;
        }
        const std::int64_t w = std::int64_t(std::floor(double(k) / (2 * d.q) + kSlack));
        std::vector<std::int64_t> start(max_level + 1, 0);
        std::uint32_t next = 1;
        for (std::int64_t r = 1; r <= last && next <= max_level; ++r) {
            if (!(2 * d.q * double(r) > double(k))) continue;
            const std::int64_t s = r - w;
            if (s < 1 || w < 1) continue;
            if (r <= R[next] + std::int64_t(T)) continue;
            bool events = true;
            for (const auto& cd : chains) {
                events = sync ? cd->premise(s, r) : cd->premise(s + T, r - T);
                if (!events) break;
            }
            if (!events) continue;
            const std::int64_t deep = deep_honest_round(r, k);
            while (next <= max_level && R[next] < deep && r > R[next] + std::int64_t(T)) start[next++] = r;
        }
        rep.scanned += max_level;
        for (std::uint32_t l = 1; l <= max_level; ++l) {
            const std::int64_t r0 = start[l];
            if (r0 == 0) continue;
            ++rep.held;
            // Fast path: every voter chain's common part from r0 on already
            // counts votes for all levels up to l.
            bool fast = true;
            for (const auto& cd : chains)
                if (first_missing[cd->suffix_lca[r0]] <= l) {
                    fast = false;
                    break;
                }
            if (fast) continue;
            const RoundSequences& first = sequences_at(r0);
            const LeaderSequence ref = prefix_of(first.distinct[0], l);
            std::int64_t bad = 0;
            for (std::int64_t r = r0; r <= last && !bad; ++r)
                for (const LeaderSequence& seq : sequences_at(r).distinct)
                    if (seq.levels() < l || !(prefix_of(seq, l).leaders == ref.leaders)) {
                        bad = r;
                        break;
                    }
            if (!bad) continue;
            ++rep.violations;
            if (rep.counterexamples.size() < ImplicationReport::kMaxCounterexamples)
                rep.counterexamples.push_back(fingerprint(record, 0, r0 - w, r0, k,
                                                          "level=" + std::to_string(l) + " changed_at=" + std::to_string(bad)));
        }
    }
    return rep;
}

SuiteReport prism_suite(const SimRecord& record, const SuiteOptions& options)
{
    if (!record.prism) throw std::invalid_argument("prism_suite needs a Prism record");
    if (record.derived.q <= 0) throw std::invalid_argument("suites need q > 0");
    SuiteReport out;
    const auto hdepth = honest_depths(record.tree);
    {
        const ChainData cd(record, 0);
        run_chain(record, cd, hdepth, options, "proposer.", false, out);
    }
    for (std::uint32_t j = 1; j < record.chains; ++j) {
        const ChainData cd(record, j);
        run_chain(record, cd, hdepth, options, "voter.", true, out);
    }
    out.get("proposer_quality").merge(proposer_quality_check(record, options));
    out.get("leader_inclusion").merge(leader_inclusion_scan(record, options));
    out.get("fix_all").merge(fix_all_check(record, options));
    return out;
}

SimRecord plant_violation(SimRecord record)
{
    ViewRound& v = record.rounds.back();
    for (std::uint32_t c = 0; c < v.classes(record.chains); ++c) {
        BlockId& tip = v.class_tips[std::size_t(c) * record.chains];
        if (record.tree[tip].height > 1) tip = record.tree.ancestor(tip, 1);
    }
    return record;
}

} // namespace backbone
