#include "backbone/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace backbone {

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, Substream stream)
    : key_(mix64(mix64(mix64(seed) ^ trial) ^ static_cast<std::uint64_t>(stream)))
{
}

CounterRng CounterRng::from_key(std::uint64_t key)
{
    CounterRng r;
    r.key_ = key;
    return r;
}

std::uint64_t CounterRng::next_u64()
{
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++);
}

double CounterRng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t bound)
{
    if (bound == 0) throw std::invalid_argument("CounterRng::below: zero bound");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

BinomialTable::BinomialTable(std::uint32_t trials, double prob) : trials_(trials), prob_(prob)
{
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("BinomialTable: prob outside [0,1]");
    cdf_.resize(trials + 1);
    double acc = 0.0;
    for (std::uint32_t k = 0; k <= trials; ++k) {
        acc += pmf(k);
        cdf_[k] = acc;
    }
    cdf_[trials] = 1.0;
}

double BinomialTable::pmf(std::uint32_t k) const
{
    if (k > trials_) return 0.0;
    if (prob_ == 0.0) return k == 0 ? 1.0 : 0.0;
    if (prob_ == 1.0) return k == trials_ ? 1.0 : 0.0;
    const double n = trials_;
    const double lc = std::lgamma(n + 1) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1);
    return std::exp(lc + k * std::log(prob_) + (n - k) * std::log1p(-prob_));
}

std::uint32_t BinomialTable::sample(CounterRng& rng) const
{
    const double u = rng.uniform();
    // Means are small in every experiment, so a forward scan beats bisection.
    std::uint32_t k = 0;
    while (cdf_[k] <= u) ++k;
    return k;
}

} // namespace backbone
