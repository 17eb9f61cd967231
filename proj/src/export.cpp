#include "backbone/export.hpp"

#include "backbone/prism.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

namespace backbone {

using nlohmann::json;

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

json params_to_json(const ProtocolParams& p)
{
    return json{{"n", p.n}, {"t", p.t}, {"p", p.p}, {"T", p.T}, {"m", p.m}, {"horizon", p.horizon}, {"seed", p.seed}};
}

json derived_to_json(const DerivedParams& d)
{
    return json{{"beta", d.beta},
                {"xi", d.xi},
                {"q", d.q},
                {"eta", d.eta},
                {"eta_prime", d.eta_prime},
                {"y_rate", d.y_rate},
                {"sync_admissible", d.sync_admissible},
                {"bounded_admissible", d.bounded_admissible}};
}

namespace {

json block_to_json(const Block& b)
{
    json j{{"id", b.id},
           {"chain", b.chain},
           {"parent", b.parent == kNoBlock ? json(nullptr) : json(b.parent)},
           {"honest", b.honest()},
           {"miner", b.miner},
           {"mined_round", b.mined_round},
           {"height", b.height},
           {"broadcast_round", b.released() ? json(b.broadcast_round) : json(nullptr)}};
    if (!b.refs.empty()) j["refs"] = b.refs;
    if (!b.votes.empty()) {
        json votes = json::array();
        for (const Vote& v : b.votes) votes.push_back({v.level, v.proposer});
        j["votes"] = std::move(votes);
    }
    if (!b.payload.empty()) {
        json txs = json::array();
        for (const Tx& t : b.payload) txs.push_back({t.token, t.conflict_key});
        j["payload"] = std::move(txs);
    }
    return j;
}

json marker_rounds(const std::vector<std::vector<std::uint8_t>>& flags)
{
    json out = json::array();
    for (const auto& chain : flags) {
        json rounds = json::array();
        for (std::size_t i = 0; i < chain.size(); ++i)
            if (chain[i]) rounds.push_back(std::int64_t(i) + 1);
        out.push_back(std::move(rounds));
    }
    return out;
}

json txs_to_json(const std::vector<Tx>& txs)
{
    json out = json::array();
    for (const Tx& t : txs) out.push_back({t.token, t.conflict_key});
    return out;
}

std::size_t common_prefix(const std::vector<BlockId>& a, const std::vector<BlockId>& b)
{
    std::size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    return k;
}

std::int32_t first_miner(const RoundSequences& views, std::size_t k)
{
    return std::int32_t(std::find(views.of_miner.begin(), views.of_miner.end(), std::uint32_t(k)) -
                        views.of_miner.begin());
}

// Per round: distinct leader sequences, each as a prefix length shared with
// the previous round's first sequence plus the remaining leaders.
json prism_sections(const SimRecord& record, json& ledgers)
{
    json rounds = json::array();
    std::vector<BlockId> previous;
    RoundSequences views;
    for (std::int64_t r = 1; r <= record.last_round(); ++r) {
        views = view_sequences(record, r);
        json seqs = json::array();
        for (const LeaderSequence& s : views.distinct) {
            const std::size_t keep = common_prefix(previous, s.leaders);
            seqs.push_back({{"prefix", keep},
                            {"tail", std::vector<BlockId>(s.leaders.begin() + std::ptrdiff_t(keep), s.leaders.end())}});
        }
        json row{{"round", r}, {"sequences", std::move(seqs)}};
        if (views.distinct.size() > 1) row["of_miner"] = views.of_miner;
        rounds.push_back(std::move(row));
        previous = views.distinct.front().leaders;
    }
    ledgers = json::array();
    for (std::size_t k = 0; k < views.distinct.size(); ++k) {
        const PrismView view(record, record.last_round(), first_miner(views, k));
        const Ledger ledger = build_ledger(view, views.distinct[k]);
        ledgers.push_back({{"view", k},
                           {"epochs", ledger.epochs},
                           {"txs", txs_to_json(ledger.txs)},
                           {"discarded", txs_to_json(ledger.discarded)},
                           {"partial", ledger.partial}});
    }
    return rounds;
}

} // namespace

json record_to_json(const SimRecord& record)
{
    json trace = json::array();
    for (std::uint32_t c = 0; c < record.trace.chain_count(); ++c)
        trace.push_back({{"h", record.trace.h_column(c)}, {"z", record.trace.z_column(c)}});

    json blocks = json::array();
    for (BlockId b = 0; b < record.tree.size(); ++b) blocks.push_back(block_to_json(record.tree[b]));

    json rounds = json::array();
    for (std::int64_t r = 1; r <= record.last_round(); ++r) {
        const ViewRound& v = record.at(r);
        json tips = json::array();
        for (std::uint32_t c = 0; c < v.classes(record.chains); ++c)
            tips.push_back(std::vector<BlockId>(v.class_tips.begin() + std::ptrdiff_t(c) * record.chains,
                                                v.class_tips.begin() + std::ptrdiff_t(c + 1) * record.chains));
        json row{{"round", r}, {"class_tips", std::move(tips)}};
        if (v.classes(record.chains) > 1) row["miner_class"] = v.miner_class;
        rounds.push_back(std::move(row));
    }

    json j{{"schema_version", kRecordSchemaVersion},
           {"protocol", record.prism ? "prism" : "bitcoin"},
           {"params", params_to_json(record.params)},
           {"derived", derived_to_json(record.derived)},
           {"adversary", record.adversary},
           {"trial", record.trial},
           {"chains", record.chains},
           {"trace", std::move(trace)},
           {"blocks", std::move(blocks)},
           {"rounds", std::move(rounds)},
           {"unique_rounds", marker_rounds(record.unique_round)},
           {"isolated_rounds", marker_rounds(record.isolated_round)},
           {"adversary_mined", record.adversary_mined},
           {"adversary_successes", record.adversary_successes}};
    if (record.prism) {
        j["first_level_round"] = record.first_level_round;
        json ledgers;
        j["leader_sequences"] = prism_sections(record, ledgers);
        j["final_ledgers"] = std::move(ledgers);
    }
    return j;
}

std::string record_json_string(const SimRecord& record)
{
    return record_to_json(record).dump();
}

std::vector<LatencyRow> latency_rows(const SimRecord& record)
{
    const auto lat = tx_latencies(record);
    std::vector<LatencyRow> rows;
    for (BlockId b = record.tree.chain_count(); b < record.tree.size(); ++b) {
        const Block& blk = record.tree[b];
        if (!blk.honest() || blk.payload.empty() || !blk.released()) continue;
        rows.push_back({record.trial, b, blk.broadcast_round, lat[b]});
    }
    return rows;
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundReport>& rows)
{
    os << "formula_id,model,xi,q,T,m,arg,raw,value\n";
    for (const BoundReport& r : rows)
        os << r.formula_id << ',' << to_string(r.model) << ',' << format_double(r.xi) << ',' << format_double(r.q)
           << ',' << r.T << ',' << r.m << ',' << format_double(r.arg) << ',' << format_double(r.raw) << ','
           << format_double(r.value) << '\n';
}

void write_implications_csv(std::ostream& os, const SuiteReport& report)
{
    os << "theorem,scanned,held,violations,first_counterexample\n";
    for (const ImplicationReport& r : report.reports)
        os << r.theorem << ',' << r.scanned << ',' << r.held << ',' << r.violations << ','
           << (r.counterexamples.empty() ? "" : r.counterexamples.front()) << '\n';
}

void write_events_csv(std::ostream& os, const std::vector<FrequencyReport>& rows)
{
    os << "event,span,trials,failures,failure_rate,bound,ci_low,ci_high,vacuous,flagged\n";
    for (const FrequencyReport& r : rows)
        os << r.event << ',' << r.span << ',' << r.trials << ',' << r.failures << ',' << format_double(r.failure_rate)
           << ',' << format_double(r.bound) << ',' << format_double(r.ci.low) << ',' << format_double(r.ci.high)
           << ',' << int(r.vacuous) << ',' << int(r.flagged) << '\n';
}

void write_latency_csv(std::ostream& os, const std::vector<LatencyRow>& rows)
{
    os << "trial,block,broadcast_round,latency\n";
    for (const LatencyRow& r : rows) {
        os << r.trial << ',' << r.block << ',' << r.broadcast_round << ',';
        if (r.latency) os << *r.latency;
        os << '\n';
    }
}

json bounds_to_json(const std::vector<BoundReport>& rows)
{
    json out = json::array();
    for (const BoundReport& r : rows)
        out.push_back({{"formula_id", r.formula_id},
                       {"model", to_string(r.model)},
                       {"xi", r.xi},
                       {"q", r.q},
                       {"T", r.T},
                       {"m", r.m},
                       {"arg", r.arg},
                       {"raw", r.raw},
                       {"value", r.value}});
    return json{{"schema_version", kReportSchemaVersion}, {"bounds", std::move(out)}};
}

json implications_to_json(const SuiteReport& report)
{
    json out = json::array();
    for (const ImplicationReport& r : report.reports)
        out.push_back({{"theorem", r.theorem},
                       {"scanned", r.scanned},
                       {"held", r.held},
                       {"violations", r.violations},
                       {"counterexamples", r.counterexamples}});
    return json{{"schema_version", kReportSchemaVersion}, {"implications", std::move(out)}};
}

json events_to_json(const std::vector<FrequencyReport>& rows)
{
    json out = json::array();
    for (const FrequencyReport& r : rows)
        out.push_back({{"event", r.event},
                       {"span", r.span},
                       {"trials", r.trials},
                       {"failures", r.failures},
                       {"failure_rate", r.failure_rate},
                       {"bound", r.bound},
                       {"ci_low", r.ci.low},
                       {"ci_high", r.ci.high},
                       {"vacuous", r.vacuous},
                       {"flagged", r.flagged}});
    return json{{"schema_version", kReportSchemaVersion}, {"events", std::move(out)}};
}

} // namespace backbone
