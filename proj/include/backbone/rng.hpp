// Counter-based random streams and exact-table binomial sampling.
#pragma once

#include <cstdint>
#include <vector>

namespace backbone {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used both as the stream
// generator and to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream identifiers within one trial.
enum class Substream : std::uint64_t {
    trace = 1,
    miner_assignment = 2,
    adversary = 3,
    fast_path = 4,
    scratch = 5,
};

// Output i of a stream is mix64(key + i * golden), i.e. SplitMix64 evaluated at
// counter i. The key depends only on (seed, trial, substream), so a trial's
// draws never depend on which thread runs it or on other trials.
class CounterRng {
public:
    CounterRng() = default;
    CounterRng(std::uint64_t seed, std::uint64_t trial, Substream stream);
    static CounterRng from_key(std::uint64_t key);

    std::uint64_t next_u64();
    // Uniform double in [0, 1) with 53 random bits.
    double uniform();
    // Uniform integer in [0, bound); bound > 0. Lemire's rejection method.
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Inverse-CDF sampler for Binomial(trials, prob). The table is built once per
// parameter set; each draw consumes exactly one uniform.
class BinomialTable {
public:
    BinomialTable() = default;
    BinomialTable(std::uint32_t trials, double prob);

    std::uint32_t sample(CounterRng& rng) const;
    std::uint32_t trials() const { return trials_; }
    double prob() const { return prob_; }
    double pmf(std::uint32_t k) const;

private:
    std::uint32_t trials_ = 0;
    double prob_ = 0.0;
    std::vector<double> cdf_;
};

} // namespace backbone
