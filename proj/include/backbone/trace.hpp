// Mining traces, counting processes and typical-event predicates.
#pragma once

#include "backbone/params.hpp"
#include "backbone/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace backbone {

struct RoundOutcome {
    std::vector<std::uint32_t> h; // honest blocks per chain
    std::vector<std::uint32_t> z; // adversarial budget per chain
};

// Rounds are 1-based; an interval [s, r) covers rounds s..r-1.
class Trace {
public:
    Trace() = default;
    Trace(std::uint32_t chain_count, std::uint32_t rounds, std::uint32_t honest_cap, std::uint32_t adversary_cap);

    std::uint32_t rounds() const { return rounds_; }
    std::uint32_t chain_count() const { return chain_count_; }
    std::uint32_t honest_cap() const { return honest_cap_; }
    std::uint32_t adversary_cap() const { return adversary_cap_; }

    std::uint32_t h(std::uint32_t chain, std::int64_t round) const { return h_[chain][round - 1]; }
    std::uint32_t z(std::uint32_t chain, std::int64_t round) const { return z_[chain][round - 1]; }
    void set(std::uint32_t chain, std::int64_t round, std::uint32_t h, std::uint32_t z);
    RoundOutcome outcome(std::int64_t round) const;

    const std::vector<std::uint16_t>& h_column(std::uint32_t chain) const { return h_[chain]; }
    const std::vector<std::uint16_t>& z_column(std::uint32_t chain) const { return z_[chain]; }

    bool operator==(const Trace&) const = default;

private:
    std::uint32_t chain_count_ = 0;
    std::uint32_t rounds_ = 0;
    std::uint32_t honest_cap_ = 0;
    std::uint32_t adversary_cap_ = 0;
    std::vector<std::vector<std::uint16_t>> h_;
    std::vector<std::vector<std::uint16_t>> z_;
};

class TraceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Draws h ~ Binomial(n-t, p) and z ~ Binomial(t, p) for every round and chain,
// round-major, chain-minor, h before z.
Trace sample_trace(const ProtocolParams& params, CounterRng& rng, std::uint32_t length, std::uint32_t chain_count = 1);

struct IntervalCounts {
    std::int64_t X = 0;
    std::int64_t Y = 0;
    std::int64_t Z = 0;
    std::int64_t Xp = 0;
    std::int64_t Yp = 0;
};

// X, Y, Z over [s, r). Requires 1 <= s < r <= rounds + 1.
IntervalCounts basic_counts(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r);
// All five counts. Requires T <= s < r <= rounds - T + 2.
IntervalCounts interval_counts(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, std::uint32_t T);

// Indicator-sum functions over real-valued windows. The interval length is
// implied by the window size: size - (T-1) for x, size - 2(T-1) for y.
std::int64_t x_func(std::span<const double> h, std::uint32_t T);
std::int64_t y_func(std::span<const double> h, std::uint32_t T);

struct EBreakdown {
    bool e1 = false;
    bool e2 = false;
    bool e3 = false;
    bool all() const { return e1 && e2 && e3; }
};

struct FBreakdown {
    bool f1 = false;
    bool f2 = false;
    bool f3 = false;
    bool f4 = false;
    bool all() const { return f1 && f2 && f3 && f4; }
};

// Predicates on precomputed counts over an interval of the given length.
EBreakdown typical_E(const IntervalCounts& c, double span, const DerivedParams& d);
FBreakdown typical_F(const IntervalCounts& c, double span, const DerivedParams& d, std::uint32_t T);

bool event_E(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, const DerivedParams& d);
bool event_F(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, std::uint32_t T,
             const DerivedParams& d);

// Prefix sums of the counting processes for one chain at a fixed delay T.
class ChainIndex {
public:
    ChainIndex() = default;
    ChainIndex(const Trace& trace, std::uint32_t chain, std::uint32_t T);

    std::int64_t rounds() const { return rounds_; }
    std::uint32_t T() const { return T_; }
    std::int64_t X(std::int64_t s, std::int64_t r) const { return x_[r - 1] - x_[s - 1]; }
    std::int64_t Y(std::int64_t s, std::int64_t r) const { return y_[r - 1] - y_[s - 1]; }
    std::int64_t Z(std::int64_t s, std::int64_t r) const { return z_[r - 1] - z_[s - 1]; }
    std::int64_t Xp(std::int64_t s, std::int64_t r) const { return xp_[r - 1] - xp_[s - 1]; }
    std::int64_t Yp(std::int64_t s, std::int64_t r) const { return yp_[r - 1] - yp_[s - 1]; }
    IntervalCounts counts(std::int64_t s, std::int64_t r) const;
    bool is_unique(std::int64_t round) const { return Y(round, round + 1) == 1; }
    bool is_doubly_isolated(std::int64_t round) const { return Yp(round, round + 1) == 1; }

private:
    std::int64_t rounds_ = 0;
    std::uint32_t T_ = 1;
    std::vector<std::int64_t> x_, y_, z_, xp_, yp_;
};

// Truncated typical events: the conjunction of E (resp. F) over every interval
// [a, b] with a <= s, b >= r, a >= 1 (resp. a >= T) and b <= end_limit.
// Evaluated through a per-start table of the latest failing end.
class TypicalEvents {
public:
    enum class Kind { E, F };

    TypicalEvents(const ChainIndex& index, const DerivedParams& d, Kind kind, std::int64_t end_limit);

    // G_trunc / J_trunc for s <= r. Intervals entirely outside the table
    // range are rejected.
    bool holds(std::int64_t s, std::int64_t r) const;
    bool single(std::int64_t s, std::int64_t r) const;
    std::int64_t end_limit() const { return end_limit_; }
    std::int64_t first_start() const { return first_start_; }

private:
    const ChainIndex* index_;
    DerivedParams d_;
    Kind kind_;
    std::int64_t end_limit_;
    std::int64_t first_start_;
    // prefix_bad_[s] = latest end b such that the event fails on [a, b] for some a <= s
    std::vector<std::int64_t> prefix_bad_;
};

bool event_G_trunc(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, const DerivedParams& d);
bool event_J_trunc(const Trace& trace, std::uint32_t chain, std::int64_t s, std::int64_t r, std::uint32_t T,
                   const DerivedParams& d);

// Columnar text export: header "round,chain,h,z" then one line per round and chain.
void write_trace_csv(std::ostream& os, const Trace& trace);
Trace read_trace_csv(std::istream& is, std::uint32_t honest_cap, std::uint32_t adversary_cap);

} // namespace backbone
