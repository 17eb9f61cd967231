#include "backbone/metrics.hpp"

#include "backbone/bounds.hpp"
#include "backbone/prism.hpp"
#include "backbone/rng.hpp"
#include "backbone/runner.hpp"
#include "backbone/trace.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace backbone {

double chain_quality(const std::vector<MinerKind>& kinds, std::uint32_t k)
{
    if (k == 0 || kinds.size() <= k) throw std::invalid_argument("chain_quality: need more than k blocks");
    const auto honest = std::count(kinds.end() - k, kinds.end(), MinerKind::honest);
    return double(honest) / k;
}

double chain_quality(const BlockTree& tree, const std::vector<BlockId>& chain, std::uint32_t k)
{
    std::vector<MinerKind> kinds;
    kinds.reserve(chain.size());
    for (BlockId b : chain) kinds.push_back(tree[b].kind);
    return chain_quality(kinds, k);
}

bool is_prefix(const std::vector<BlockId>& prefix, const std::vector<BlockId>& chain)
{
    return prefix.size() <= chain.size() && std::equal(prefix.begin(), prefix.end(), chain.begin());
}

PermanenceResult permanence_scan(const SimRecord& record, const std::vector<BlockId>& prefix, std::int64_t from_round,
                                 std::uint32_t chain)
{
    const BlockTree& tree = record.tree;
    if (prefix.empty()) return {};
    // A prefix that is not itself a chain from genesis can never be contained.
    const bool well_formed = tree.chain(prefix.back()) == prefix && tree[prefix.back()].chain == chain;
    for (std::int64_t r = std::max<std::int64_t>(from_round, 1); r <= record.last_round(); ++r) {
        const ViewRound& v = record.at(r);
        for (std::uint32_t i = 0; i < record.honest_miners(); ++i) {
            const BlockId tip = v.class_tips[std::size_t(v.miner_class[i]) * record.chains + chain];
            if (!well_formed || !tree.is_ancestor(prefix.back(), tip)) return {false, r, std::int32_t(i)};
        }
    }
    return {};
}

Interval wilson(std::uint64_t successes, std::uint64_t trials, double z)
{
    if (trials == 0) return {0.0, 1.0};
    const double n = double(trials);
    const double p = double(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

double failure_bound(const std::string& event, double span, const DerivedParams& d, std::uint32_t T)
{
    if (event == "E") return 1.0 - lb_prob_E(span, d);
    if (event == "E1") return std::min(1.0, fail_bound_E1(span, d));
    if (event == "E2") return std::min(1.0, fail_bound_E2(span, d));
    if (event == "E3") return std::min(1.0, fail_bound_E3(span, d));
    if (event == "F") return 1.0 - lb_prob_F(span, d, T);
    if (event == "G") return 1.0 - lb_prob_G(span, d);
    if (event == "J") {
        if (span <= 2.0 / d.q) return 1.0; // outside the lemma's range
        return 1.0 - lb_prob_J(span, d, T);
    }
    throw std::invalid_argument("unknown event: " + event);
}

} // namespace

std::vector<FrequencyReport> event_frequencies(const std::vector<std::string>& events, std::int64_t span,
                                              const ProtocolParams& params, std::uint64_t trials, unsigned threads)
{
    if (trials < kMinFrequencyTrials) throw std::invalid_argument("event_frequency needs at least 1000 trials");
    if (span < 1) throw std::invalid_argument("event_frequency: span must be positive");
    const DerivedParams d = derive(params);
    if (d.q <= 0) throw std::invalid_argument("event_frequency: q must be positive");
    const std::size_t count = events.size();
    std::vector<FrequencyReport> reps(count);
    for (std::size_t e = 0; e < count; ++e) {
        reps[e].event = events[e];
        reps[e].span = span;
        reps[e].trials = trials;
        reps[e].bound = failure_bound(events[e], double(span), d, params.T);
    }
    auto in_E_family = [](const std::string& ev) { return ev == "E" || ev == "E1" || ev == "E2" || ev == "E3"; };

    const BinomialTable honest(params.n - params.t, params.p), adversary(params.t, params.p);
    const std::uint32_t T = params.T;
    std::mutex mu;
    std::vector<std::uint64_t> failures(count, 0);
    // Trials are split into fixed blocks so the sums are independent of scheduling.
    const std::uint64_t block = 64;
    const std::uint64_t blocks = (trials + block - 1) / block;
    parallel_for(blocks, threads, [&](std::uint64_t bi) {
        std::vector<std::uint64_t> local(count, 0);
        for (std::uint64_t trial = bi * block; trial < std::min(trials, (bi + 1) * block); ++trial) {
            // The E family shares one draw of the interval sums; every other
            // event restarts the trial's stream, as if evaluated alone.
            std::optional<EBreakdown> e;
            for (std::size_t k = 0; k < count; ++k) {
                const std::string& event = events[k];
                CounterRng rng(params.seed, trial, Substream::fast_path);
                bool ok = false;
                if (in_E_family(event)) {
                    if (!e) {
                        IntervalCounts c;
                        for (std::int64_t r = 0; r < span; ++r) {
                            const std::uint32_t h = honest.sample(rng);
                            c.X += h >= 1;
                            c.Y += h == 1;
                            c.Z += adversary.sample(rng);
                        }
                        e = typical_E(c, double(span), d);
                    }
                    ok = event == "E" ? e->all() : event == "E1" ? e->e1 : event == "E2" ? e->e2 : e->e3;
                } else {
                    ProtocolParams pp = params;
                    if (event == "F") {
                        pp.horizon = std::uint32_t(span + 2 * T);
                        const Trace trace = sample_trace(pp, rng, pp.horizon);
                        ok = event_F(trace, 0, T, T + span, T, d);
                    } else {
                        pp.horizon = std::uint32_t(3 * span + (event == "J" ? 2 * T : 0));
                        const Trace trace = sample_trace(pp, rng, pp.horizon);
                        ok = event == "G" ? event_G_trunc(trace, 0, span + 1, 2 * span + 1, d)
                                          : event_J_trunc(trace, 0, span + 1, 2 * span + 1, T, d);
                    }
                }
                local[k] += !ok;
            }
        }
        std::lock_guard<std::mutex> lock(mu);
        for (std::size_t k = 0; k < count; ++k) failures[k] += local[k];
    });
    for (std::size_t k = 0; k < count; ++k) {
        FrequencyReport& rep = reps[k];
        rep.failures = failures[k];
        rep.failure_rate = double(rep.failures) / double(trials);
        rep.ci = wilson(rep.failures, trials);
        rep.vacuous = rep.bound >= 1.0;
        rep.flagged = !rep.vacuous && rep.ci.low > rep.bound;
    }
    return reps;
}

FrequencyReport event_frequency(const std::string& event, std::int64_t span, const ProtocolParams& params,
                                std::uint64_t trials, unsigned threads)
{
    return event_frequencies({event}, span, params, trials, threads).front();
}

std::vector<std::optional<std::int64_t>> tx_latencies(const SimRecord& record)
{
    if (!record.prism) throw std::invalid_argument("tx_latency needs a Prism record");
    const BlockTree& tree = record.tree;
    // stable[b]: earliest round from which b has been in every honest ledger
    // through the last round; 0 when not (yet) established.
    std::vector<std::int64_t> stable(tree.size(), 0);
    std::vector<std::uint8_t> broken(tree.size(), 0);
    for (std::int64_t r = record.last_round(); r >= 1; --r) {
        const RoundSequences views = view_sequences(record, r);
        std::vector<std::uint8_t> in_all(tree.size(), 1);
        for (std::size_t k = 0; k < views.distinct.size(); ++k) {
            const std::int32_t miner = std::int32_t(
                std::find(views.of_miner.begin(), views.of_miner.end(), std::uint32_t(k)) - views.of_miner.begin());
            const auto epoch = epoch_map(PrismView(record, r, miner), views.distinct[k]);
            for (BlockId b = 0; b < tree.size(); ++b)
                if (epoch[b] == kNoEpoch) in_all[b] = 0;
        }
        bool any_open = false;
        for (BlockId b = 0; b < tree.size(); ++b) {
            if (broken[b]) continue;
            if (in_all[b]) {
                stable[b] = r;
                any_open = true;
            } else {
                broken[b] = 1;
            }
        }
        if (!any_open) break;
    }
    std::vector<std::optional<std::int64_t>> out(tree.size());
    for (BlockId b = tree.chain_count(); b < tree.size(); ++b) {
        const Block& blk = tree[b];
        if (!blk.honest() || blk.payload.empty() || !blk.released() || stable[b] == 0) continue;
        out[b] = std::max<std::int64_t>(stable[b] - blk.broadcast_round, 0);
    }
    return out;
}

std::optional<std::int64_t> tx_latency(const SimRecord& record, BlockId block)
{
    if (block >= record.tree.size() || !record.tree[block].released()) return std::nullopt;
    const Block& blk = record.tree[block];
    if (blk.payload.empty()) return std::nullopt;
    const BlockTree& tree = record.tree;
    std::int64_t stable = 0;
    for (std::int64_t r = record.last_round(); r >= 1; --r) {
        const RoundSequences views = view_sequences(record, r);
        bool all = true;
        for (std::size_t k = 0; k < views.distinct.size() && all; ++k) {
            const std::int32_t miner = std::int32_t(
                std::find(views.of_miner.begin(), views.of_miner.end(), std::uint32_t(k)) - views.of_miner.begin());
            all = epoch_map(PrismView(record, r, miner), views.distinct[k])[block] != kNoEpoch;
        }
        if (!all) break;
        stable = r;
    }
    (void)tree;
    if (stable == 0) return std::nullopt;
    return std::max<std::int64_t>(stable - blk.broadcast_round, 0);
}

void ImplicationReport::merge(const ImplicationReport& other)
{
    if (theorem.empty()) theorem = other.theorem;
    scanned += other.scanned;
    held += other.held;
    violations += other.violations;
    for (const auto& c : other.counterexamples)
        if (counterexamples.size() < kMaxCounterexamples) counterexamples.push_back(c);
}

} // namespace backbone
