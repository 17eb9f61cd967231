// Block diffusion with per-recipient delays bounded by T.
#pragma once

#include "backbone/block_tree.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace backbone {

inline constexpr std::uint32_t kNever = std::numeric_limits<std::uint32_t>::max();

struct DeliveryEvent {
    BlockId block = kNoBlock;
    std::int32_t sender = -1; // -1 for the adversary
    std::int32_t recipient = 0;
    std::int64_t broadcast_round = 0;
    std::int64_t delivery_round = 0;
    bool operator==(const DeliveryEvent&) const = default;
};

struct DelayPolicy {
    enum class Kind { min_delay, max_delay, adversarial };
    Kind kind = Kind::min_delay;
    std::vector<std::uint32_t> offsets; // per recipient, used by the adversarial kind

    static DelayPolicy min_delay() { return {}; }
    static DelayPolicy max_delay() { return {Kind::max_delay, {}}; }
    static DelayPolicy per_recipient(std::vector<std::uint32_t> offsets)
    {
        return {Kind::adversarial, std::move(offsets)};
    }
};

class NetworkError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// One event per honest miner other than the sender, each within
// [broadcast_round + 1, broadcast_round + T].
std::vector<DeliveryEvent> schedule(BlockId block, std::int32_t sender, std::int64_t broadcast_round,
                                    std::uint32_t recipients, std::uint32_t T, const DelayPolicy& policy);

// Per-miner knowledge. known_round(b, i) is the round from which miner i may
// react to block b (kNever if not yet scheduled).
class ViewSet {
public:
    ViewSet() = default;
    explicit ViewSet(std::uint32_t miners) : miners_(miners) {}

    std::uint32_t miners() const { return miners_; }
    void add_block(); // extend the table for a newly created block
    void plan(BlockId block, std::int32_t miner, std::int64_t round);
    std::uint32_t planned(BlockId block, std::int32_t miner) const { return planned_[std::size_t(block) * miners_ + miner]; }
    bool knows(BlockId block, std::int32_t miner, std::int64_t round) const
    {
        return planned(block, miner) <= round;
    }
    const std::vector<std::uint32_t>& table() const { return planned_; }

private:
    std::uint32_t miners_ = 0;
    std::vector<std::uint32_t> planned_;
};

// Pending deliveries bucketed by round.
class Network {
public:
    Network(std::uint32_t miners, std::uint32_t T, std::int64_t last_round);

    std::uint32_t T() const { return T_; }
    // Registers events, raising each delivery to no earlier than the delivery
    // of every block the new one links to, so known sets stay closed.
    void submit(const BlockTree& tree, const std::vector<DeliveryEvent>& events, ViewSet& views);
    // Events due at `round`, ordered by broadcast round, own blocks first, then
    // block id and recipient.
    std::vector<DeliveryEvent> deliver(std::int64_t round);
    std::size_t pending() const;

private:
    std::uint32_t miners_;
    std::uint32_t T_;
    std::vector<std::vector<DeliveryEvent>> buckets_;
};

} // namespace backbone
