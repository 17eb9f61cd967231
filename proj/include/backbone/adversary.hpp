// Adversary interface and the built-in strategies.
#pragma once

#include "backbone/block_tree.hpp"
#include "backbone/network.hpp"
#include "backbone/rng.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace backbone {

class AdversaryViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mining request for one adversarial block.
struct MineRequest {
    std::uint32_t chain = 0;
    BlockId parent = kNoBlock;
    std::vector<BlockId> refs;
    std::vector<Vote> votes;
    std::vector<Tx> payload;
};

// Everything the adversary did in one round, as recorded by the engine.
struct AdversaryAction {
    std::int64_t round = 0;
    std::vector<BlockId> mined;
    std::vector<BlockId> released; // includes linked blocks released implicitly
    std::vector<DelayPolicy> policies;
};

// The engine's view granted to a strategy during its turn. All mutating calls
// are validated; a violation aborts the run with AdversaryViolation.
class AdversaryContext {
public:
    virtual ~AdversaryContext() = default;

    virtual std::int64_t round() const = 0;
    virtual std::uint32_t T() const = 0;
    virtual std::uint32_t chains() const = 0;
    virtual std::uint32_t honest_miners() const = 0;
    virtual const BlockTree& tree() const = 0;
    // Remaining adversarial blocks on a chain this round.
    virtual std::uint32_t budget(std::uint32_t chain) const = 0;
    // Adopted tip of an honest miner as of the start of this round.
    virtual BlockId honest_tip(std::int32_t miner, std::uint32_t chain) const = 0;
    // Highest broadcast block on a chain (ties: earliest broadcast, then lowest id).
    virtual BlockId public_tip(std::uint32_t chain) const = 0;
    // Highest block on a chain the adversary may extend this round (any
    // adversarial block, or any block mined in an earlier round).
    virtual BlockId minable_tip(std::uint32_t chain) const = 0;
    // Counted vote of the chain ending at a voter block for a level, or kNoBlock.
    virtual BlockId counted_vote(BlockId voter_tip, std::uint32_t level) const = 0;
    virtual CounterRng& rng() = 0;

    virtual BlockId mine(const MineRequest& request) = 0;
    // Broadcasts a withheld adversarial block and any withheld blocks it links to.
    virtual void release(BlockId block, const DelayPolicy& policy) = 0;
};

class Adversary {
public:
    virtual ~Adversary() = default;
    virtual std::string name() const = 0;
    // Delivery plan for an honest block mined this round; default is min delay.
    virtual DelayPolicy honest_delay(const Block& block, AdversaryContext& ctx);
    // Called once per round after honest mining.
    virtual void act(AdversaryContext& ctx) = 0;
    // Strategy-specific counters for reporting (e.g. successful overtakes).
    virtual std::uint64_t successes() const { return 0; }
};

struct AdversarySpec {
    std::string kind = "null"; // null | private_fork | leader_censor | split_view
    std::uint32_t release_depth = 6;
    std::uint32_t give_up = 20;
};

std::unique_ptr<Adversary> null_adversary();
std::unique_ptr<Adversary> private_fork(std::uint32_t release_depth, std::uint32_t give_up);
std::unique_ptr<Adversary> leader_censor();
std::unique_ptr<Adversary> split_view();
std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec);

} // namespace backbone
