// Deterministic theorem checks over simulation records.
//
// Each check samples (s, r) points over a lattice plus random off-lattice
// points, evaluates the truncated typical event for the chain, and when it
// holds asserts the property. Depth k is taken at the threshold ceil(2q(r-s))
// where the premise is weakest; checks that are not monotone in k also try
// a few deeper values.
#pragma once

#include "backbone/metrics.hpp"
#include "backbone/sim.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace backbone {

struct SuiteOptions {
    std::int64_t stride = 50;         // lattice spacing in rounds
    std::uint32_t random_points = 200; // off-lattice (s, r) pairs per chain
    std::vector<std::uint32_t> extra_depths = {1, 3, 10}; // added to the threshold depth
    std::vector<std::uint32_t> fix_all_depths = {5, 10, 20, 50, 100, 200, 300, 400, 450, 500, 550, 600, 650};
    std::int64_t inclusion_stride = 50; // rounds between leader-inclusion scans
};

// Reports keyed by theorem id, in creation order. References returned by
// get() stay valid as reports are added.
struct SuiteReport {
    std::deque<ImplicationReport> reports;

    ImplicationReport& get(const std::string& theorem);
    const ImplicationReport* find(const std::string& theorem) const;
    std::uint64_t violations() const;
    void merge(const SuiteReport& other);
};

// Growth, age, quality, common prefix, unique block and (T = 1) equal length
// on chain 0. Prefixes theorem ids with `prefix`.
SuiteReport chain_suite(const SimRecord& record, std::uint32_t chain, const SuiteOptions& options = {},
                        const std::string& prefix = "");

SuiteReport bitcoin_suite(const SimRecord& record, const SuiteOptions& options = {});

// Voter chains (full chain suite), the proposer chain (growth, age, unique
// block, equal length), proposer leader quality, honest-leader inclusion and
// the one-honest-block-fixes-all implication.
SuiteReport prism_suite(const SimRecord& record, const SuiteOptions& options = {});

// Leader quality over the leader sequences of every honest view.
ImplicationReport proposer_quality_check(const SimRecord& record, const SuiteOptions& options = {});
// Inclusion check for every level with an honest leader, at rounds spaced by
// options.inclusion_stride and at the last round.
ImplicationReport leader_inclusion_scan(const SimRecord& record, const SuiteOptions& options = {});
ImplicationReport fix_all_check(const SimRecord& record, const SuiteOptions& options = {});

// Copy of a record whose honest views jump back to height 1 on chain 0 at the
// last round. Growth and common prefix must flag it.
SimRecord plant_violation(SimRecord record);

} // namespace backbone
