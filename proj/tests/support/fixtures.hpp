// Parameter presets and record helpers shared by the simulation tests.
#pragma once

#include "backbone/params.hpp"
#include "backbone/sim.hpp"

#include <algorithm>
#include <cstdint>

namespace fixture {

inline backbone::ProtocolParams make(std::uint32_t n, std::uint32_t t, double q, std::uint32_t horizon,
                                     std::uint32_t T = 1, std::uint64_t seed = 1, std::uint32_t m = 1)
{
    backbone::ProtocolParams pp;
    pp.n = n;
    pp.t = t;
    pp.p = backbone::p_for_q(q, n - t);
    pp.T = T;
    pp.m = m;
    pp.horizon = horizon;
    pp.seed = seed;
    return pp;
}

// Shortest and longest adopted chain among honest miners by a round.
inline std::uint32_t min_height(const backbone::SimRecord& rec, std::int64_t round, std::uint32_t chain = 0)
{
    const auto& v = rec.at(round);
    std::uint32_t out = UINT32_MAX;
    for (std::uint32_t c = 0; c < v.classes(rec.chains); ++c)
        out = std::min(out, rec.tree[rec.class_tip(round, c, chain)].height);
    return out;
}

inline std::uint32_t max_height(const backbone::SimRecord& rec, std::int64_t round, std::uint32_t chain = 0)
{
    const auto& v = rec.at(round);
    std::uint32_t out = 0;
    for (std::uint32_t c = 0; c < v.classes(rec.chains); ++c)
        out = std::max(out, rec.tree[rec.class_tip(round, c, chain)].height);
    return out;
}

} // namespace fixture
