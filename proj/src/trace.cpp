#include "backbone/trace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace backbone {

Trace::Trace(std::uint32_t chain_count, std::uint32_t rounds, std::uint32_t honest_cap, std::uint32_t adversary_cap)
    : chain_count_(chain_count), rounds_(rounds), honest_cap_(honest_cap), adversary_cap_(adversary_cap),
      h_(chain_count, std::vector<std::uint16_t>(rounds, 0)), z_(chain_count, std::vector<std::uint16_t>(rounds, 0))
{
    if (chain_count == 0) throw TraceError("trace needs at least one chain");
    if (honest_cap > std::numeric_limits<std::uint16_t>::max() ||
        adversary_cap > std::numeric_limits<std::uint16_t>::max())
        throw TraceError("miner counts above 65535 are not supported");
}

void Trace::set(std::uint32_t chain, std::int64_t round, std::uint32_t h, std::uint32_t z)
{
    if (chain >= chain_count_ || round < 1 || round > rounds_) throw TraceError("trace cell out of range");
    if (h > honest_cap_ || z > adversary_cap_) throw TraceError("trace cell exceeds miner counts");
    h_[chain][round - 1] = static_cast<std::uint16_t>(h);
    z_[chain][round - 1] = static_cast<std::uint16_t>(z);
}

RoundOutcome Trace::outcome(std::int64_t round) const
{
    if (round < 1 || round > rounds_) throw TraceError("round out of range");
    RoundOutcome o;
    for (std::uint32_t j = 0; j < chain_count_; ++j) {
        o.h.push_back(h(j, round));
        o.z.push_back(z(j, round));
    }
    return o;
}

Trace sample_trace(const ProtocolParams& params, CounterRng& rng, std::uint32_t length, std::uint32_t chain_count)
{
    if (length > params.horizon) throw TraceError("trace length exceeds horizon");
    Trace trace(chain_count, length, params.honest(), params.t);
    const BinomialTable honest(params.honest(), params.p);
    const BinomialTable adversarial(params.t, params.p);
    for (std::uint32_t r = 1; r <= length; ++r)
        for (std::uint32_t j = 0; j < chain_count; ++j) {
            const auto h = honest.sample(rng);
            const auto z = adversarial.sample(rng);
            trace.set(j, r, h, z);
        }
    return trace;
}

IntervalCounts basic_counts(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r)
{
    if (chain >= trace.chain_count() || s < 1 || s >= r || r > std::int64_t(trace.rounds()) + 1)
        throw TraceError("interval out of range");
    IntervalCounts c;
    for (std::int64_t i = s; i < r; ++i) {
        const auto h = trace.h(chain, i);
        c.X += h >= 1;
        c.Y += h == 1;
        c.Z += trace.z(chain, i);
    }
    return c;
}

namespace {

// Honest count at a round, zero outside the trace.
std::uint32_t h_at(const Trace& trace, std::uint32_t chain, std::int64_t i)
{
    if (i < 1 || i > trace.rounds()) return 0;
    return trace.h(chain, i);
}

bool left_isolated(const Trace& trace, std::uint32_t chain, std::int64_t i, std::uint32_t T)
{
    if (h_at(trace, chain, i) != 1) return false;
    for (std::int64_t k = i - T + 1; k < i; ++k)
        if (h_at(trace, chain, k) != 0) return false;
    return true;
}

bool doubly_isolated(const Trace& trace, std::uint32_t chain, std::int64_t i, std::uint32_t T)
{
    if (!left_isolated(trace, chain, i, T)) return false;
    for (std::int64_t k = i + 1; k <= i + T - 1; ++k)
        if (h_at(trace, chain, k) != 0) return false;
    return true;
}

} // namespace

IntervalCounts interval_counts(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, std::uint32_t T)
{
    if (T < 1) throw TraceError("T must be at least 1");
    if (s < T || r > std::int64_t(trace.rounds()) - T + 2)
        throw TraceError("interval out of range for isolation counts");
    IntervalCounts c = basic_counts(trace, chain, s, r);
    for (std::int64_t i = s; i < r; ++i) {
        c.Xp += left_isolated(trace, chain, i, T);
        c.Yp += doubly_isolated(trace, chain, i, T);
    }
    return c;
}

std::int64_t x_func(std::span<const double> h, std::uint32_t T)
{
    if (T < 1 || h.size() < T) throw TraceError("x_func: window shorter than T");
    const std::size_t len = h.size() - (T - 1);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t i = k + T - 1;
        if (h[i] != 1.0) continue;
        bool quiet = true;
        for (std::size_t b = i - (T - 1); b < i && quiet; ++b) quiet = h[b] == 0.0;
        total += quiet;
    }
    return total;
}

std::int64_t y_func(std::span<const double> h, std::uint32_t T)
{
    if (T < 1 || h.size() < 2 * std::size_t(T) - 1) throw TraceError("y_func: window shorter than 2T-1");
    const std::size_t len = h.size() - 2 * (T - 1);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t i = k + T - 1;
        if (h[i] != 1.0) continue;
        bool quiet = true;
        for (std::size_t b = i - (T - 1); b <= i + (T - 1) && quiet; ++b)
            if (b != i) quiet = h[b] == 0.0;
        total += quiet;
    }
    return total;
}

EBreakdown typical_E(const IntervalCounts& c, double span, const DerivedParams& d)
{
    const double mean_x = d.q * span;
    const double a = d.xi / 6.0;
    EBreakdown e;
    e.e1 = (1.0 - a) * mean_x < c.X && c.X < (1.0 + a) * mean_x;
    e.e2 = (1.0 - a) * d.y_rate * span < c.Y;
    e.e3 = c.Z < d.p * d.t * span + a * mean_x;
    return e;
}

FBreakdown typical_F(const IntervalCounts& c, double span, const DerivedParams& d, std::uint32_t T)
{
    const double a = d.xi / 20.0;
    const double mean_xp = d.q * std::exp(T * std::log1p(-d.q)) * span;
    const double mean_yp = d.q * std::exp((2.0 * T - 1.0) * std::log1p(-d.q)) * span;
    FBreakdown f;
    f.f1 = (1.0 - a) * mean_xp < c.Xp;
    f.f2 = c.X < (1.0 + a) * d.q * span;
    f.f3 = (1.0 - a) * mean_yp < c.Yp;
    f.f4 = c.Z < d.p * d.t * span + a * mean_xp;
    return f;
}

bool event_E(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, const DerivedParams& d)
{
    return typical_E(basic_counts(trace, chain, s, r), double(r - s), d).all();
}

bool event_F(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, std::uint32_t T,
             const DerivedParams& d)
{
    return typical_F(interval_counts(trace, chain, s, r, T), double(r - s), d, T).all();
}

ChainIndex::ChainIndex(const Trace& trace, std::uint32_t chain, std::uint32_t T)
    : rounds_(trace.rounds()), T_(T)
{
    if (chain >= trace.chain_count()) throw TraceError("chain out of range");
    if (T < 1) throw TraceError("T must be at least 1");
    const std::size_t n = rounds_ + 1;
    x_.assign(n, 0);
    y_.assign(n, 0);
    z_.assign(n, 0);
    xp_.assign(n, 0);
    yp_.assign(n, 0);
    const auto& hc = trace.h_column(chain);
    const auto& zc = trace.z_column(chain);
    // Nearest round with honest blocks strictly before / after i.
    std::vector<std::int64_t> next_busy(n + 1, std::numeric_limits<std::int64_t>::max() / 2);
    for (std::int64_t i = rounds_; i >= 1; --i)
        next_busy[i - 1] = hc[i - 1] ? i : next_busy[i];
    std::int64_t last_busy = std::numeric_limits<std::int64_t>::min() / 2;
    for (std::int64_t i = 1; i <= rounds_; ++i) {
        const auto h = hc[i - 1];
        const bool xp = h == 1 && i - last_busy >= std::int64_t(T);
        const bool yp = xp && next_busy[i] - i >= std::int64_t(T);
        x_[i] = x_[i - 1] + (h >= 1);
        y_[i] = y_[i - 1] + (h == 1);
        z_[i] = z_[i - 1] + zc[i - 1];
        xp_[i] = xp_[i - 1] + xp;
        yp_[i] = yp_[i - 1] + yp;
        if (h) last_busy = i;
    }
}

IntervalCounts ChainIndex::counts(std::int64_t s, std::int64_t r) const
{
    return IntervalCounts{X(s, r), Y(s, r), Z(s, r), Xp(s, r), Yp(s, r)};
}

namespace {

// One linear threshold of a typical event: the count over [a, b) must stay
// above (lower) or below (upper) slope * (b - a).
struct Threshold {
    std::vector<double> g; // g[b] = count(1, b) - slope * b
    bool lower;
    // Suffix extreme of g: min for lower thresholds, max for upper ones.
    std::vector<double> ext;
};

Threshold make_threshold(std::int64_t end_limit, double slope, bool lower,
                         const std::function<std::int64_t(std::int64_t)>& count_to)
{
    Threshold t{std::vector<double>(end_limit + 1), lower, std::vector<double>(end_limit + 2)};
    for (std::int64_t b = 1; b <= end_limit; ++b) t.g[b] = double(count_to(b)) - slope * double(b);
    t.ext[end_limit + 1] = lower ? HUGE_VAL : -HUGE_VAL;
    for (std::int64_t b = end_limit; b >= 1; --b)
        t.ext[b] = lower ? std::min(t.ext[b + 1], t.g[b]) : std::max(t.ext[b + 1], t.g[b]);
    return t;
}

// Latest b in (lo, end] that may violate the threshold for start a, with a
// small slack so rounding never hides a violation; 0 if none.
std::int64_t latest_candidate(const Threshold& t, std::int64_t a, std::int64_t lo, std::int64_t end)
{
    const double v = t.g[a];
    const double slack = 1e-7 * (1.0 + std::abs(v));
    auto hit = [&](std::int64_t b) { return t.lower ? t.ext[b] <= v + slack : t.ext[b] >= v - slack; };
    if (lo + 1 > end || !hit(lo + 1)) return 0;
    std::int64_t good = lo + 1, bad = end + 1; // hit(good) holds; hit is monotone in b
    while (bad - good > 1) {
        const std::int64_t mid = good + (bad - good) / 2;
        (hit(mid) ? good : bad) = mid;
    }
    return good;
}

} // namespace

TypicalEvents::TypicalEvents(const ChainIndex& index, const DerivedParams& d, Kind kind, std::int64_t end_limit)
    : index_(&index), d_(d), kind_(kind), end_limit_(end_limit),
      first_start_(kind == Kind::E ? 1 : std::int64_t(index.T()))
{
    if (end_limit_ > index.rounds() + 1) throw TraceError("end limit beyond trace");
    const std::int64_t n = std::max<std::int64_t>(end_limit_, first_start_) + 1;
    prefix_bad_.assign(n, 0);

    // count(1, b) is a prefix sum, so count(a, b) = count_to(b) - count_to(a).
    const auto X = [&](std::int64_t b) { return index.X(1, b); };
    const auto Y = [&](std::int64_t b) { return index.Y(1, b); };
    const auto Z = [&](std::int64_t b) { return index.Z(1, b); };
    const auto Xp = [&](std::int64_t b) { return index.Xp(1, b); };
    const auto Yp = [&](std::int64_t b) { return index.Yp(1, b); };
    const double pt = d.p * d.t;
    std::vector<Threshold> thresholds;
    if (end_limit_ >= 1) {
        if (kind == Kind::E) {
            const double a = d.xi / 6.0;
            thresholds.push_back(make_threshold(end_limit_, (1.0 - a) * d.q, true, X));
            thresholds.push_back(make_threshold(end_limit_, (1.0 + a) * d.q, false, X));
            thresholds.push_back(make_threshold(end_limit_, (1.0 - a) * d.y_rate, true, Y));
            thresholds.push_back(make_threshold(end_limit_, pt + a * d.q, false, Z));
        } else {
            const double a = d.xi / 20.0;
            const double T = index.T();
            const double rate_xp = d.q * std::exp(T * std::log1p(-d.q));
            const double rate_yp = d.q * std::exp((2.0 * T - 1.0) * std::log1p(-d.q));
            thresholds.push_back(make_threshold(end_limit_, (1.0 - a) * rate_xp, true, Xp));
            thresholds.push_back(make_threshold(end_limit_, (1.0 + a) * d.q, false, X));
            thresholds.push_back(make_threshold(end_limit_, (1.0 - a) * rate_yp, true, Yp));
            thresholds.push_back(make_threshold(end_limit_, pt + a * rate_xp, false, Z));
        }
    }

    std::int64_t worst = 0;
    for (std::int64_t a = first_start_; a < end_limit_; ++a) {
        // Only ends beyond the running maximum can change the prefix table.
        const std::int64_t lo = std::max(worst, a);
        std::int64_t b = 0;
        for (const Threshold& t : thresholds) b = std::max(b, latest_candidate(t, a, lo, end_limit_));
        // Confirm with the exact predicate; a rejected candidate falls back to a scan.
        for (; b > lo; --b)
            if (!single(a, b)) {
                worst = b;
                break;
            }
        prefix_bad_[a] = worst;
    }
    for (std::int64_t a = std::max<std::int64_t>(end_limit_, first_start_); a < n; ++a) prefix_bad_[a] = worst;
}

bool TypicalEvents::single(std::int64_t s, std::int64_t r) const
{
    const IntervalCounts c = index_->counts(s, r);
    if (kind_ == Kind::E) return typical_E(c, double(r - s), d_).all();
    return typical_F(c, double(r - s), d_, index_->T()).all();
}

bool TypicalEvents::holds(std::int64_t s, std::int64_t r) const
{
    if (s < first_start_ || r > end_limit_ || s >= r) throw TraceError("typical event interval out of range");
    return prefix_bad_[s] < r;
}

bool event_G_trunc(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, const DerivedParams& d)
{
    const ChainIndex index(trace, chain, 1);
    return TypicalEvents(index, d, TypicalEvents::Kind::E, std::int64_t(trace.rounds()) + 1).holds(s, r);
}

bool event_J_trunc(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, std::uint32_t T,
                   const DerivedParams& d)
{
    const ChainIndex index(trace, chain, T);
    return TypicalEvents(index, d, TypicalEvents::Kind::F, std::int64_t(trace.rounds()) - T + 2).holds(s, r);
}

void write_trace_csv(std::ostream& os, const Trace& trace)
{
    os << "round,chain,h,z\n";
    for (std::int64_t r = 1; r <= trace.rounds(); ++r)
        for (std::uint32_t j = 0; j < trace.chain_count(); ++j)
            os << r << ',' << j << ',' << trace.h(j, r) << ',' << trace.z(j, r) << '\n';
}

Trace read_trace_csv(std::istream& is, std::uint32_t honest_cap, std::uint32_t adversary_cap)
{
    std::string line;
    if (!std::getline(is, line) || line != "round,chain,h,z") throw TraceError("trace csv: bad header");
    struct Row {
        std::int64_t r;
        std::uint32_t j, h, z;
    };
    std::vector<Row> rows;
    std::int64_t max_round = 0;
    std::uint32_t max_chain = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Row row{};
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ls >> row.r >> c1 >> row.j >> c2 >> row.h >> c3 >> row.z) || c1 != ',' || c2 != ',' || c3 != ',')
            throw TraceError("trace csv: malformed line: " + line);
        max_round = std::max(max_round, row.r);
        max_chain = std::max(max_chain, row.j);
        rows.push_back(row);
    }
    if (rows.size() != std::size_t(max_round) * (max_chain + 1)) throw TraceError("trace csv: missing cells");
    Trace trace(max_chain + 1, static_cast<std::uint32_t>(max_round), honest_cap, adversary_cap);
    for (const Row& row : rows) trace.set(row.j, row.r, row.h, row.z);
    return trace;
}

} // namespace backbone
