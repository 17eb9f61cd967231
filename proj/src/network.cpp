#include "backbone/network.hpp"

#include <algorithm>
#include <tuple>

namespace backbone {

std::vector<DeliveryEvent> schedule(BlockId block, std::int32_t sender, std::int64_t broadcast_round,
                                    std::uint32_t recipients, std::uint32_t T, const DelayPolicy& policy)
{
    if (T < 1) throw NetworkError("T must be at least 1");
    if (policy.kind == DelayPolicy::Kind::adversarial && policy.offsets.size() != recipients)
        throw NetworkError("delay policy must give one offset per miner");
    std::vector<DeliveryEvent> out;
    out.reserve(recipients);
    for (std::uint32_t i = 0; i < recipients; ++i) {
        if (std::int32_t(i) == sender) continue;
        std::uint32_t offset = 1;
        switch (policy.kind) {
        case DelayPolicy::Kind::min_delay: offset = 1; break;
        case DelayPolicy::Kind::max_delay: offset = T; break;
        case DelayPolicy::Kind::adversarial:
            offset = policy.offsets[i];
            if (offset < 1 || offset > T) throw NetworkError("delivery outside the delay window");
            break;
        }
        out.push_back({block, sender, std::int32_t(i), broadcast_round, broadcast_round + offset});
    }
    return out;
}

void ViewSet::add_block()
{
    planned_.resize(planned_.size() + miners_, kNever);
}

void ViewSet::plan(BlockId block, std::int32_t miner, std::int64_t round)
{
    auto& slot = planned_[std::size_t(block) * miners_ + miner];
    if (slot != kNever) throw NetworkError("block already scheduled for this miner");
    slot = static_cast<std::uint32_t>(round);
}

Network::Network(std::uint32_t miners, std::uint32_t T, std::int64_t last_round)
    : miners_(miners), T_(T), buckets_(std::size_t(last_round) + T + 2)
{
}

void Network::submit(const BlockTree& tree, const std::vector<DeliveryEvent>& events, ViewSet& views)
{
    for (DeliveryEvent e : events) {
        if (e.delivery_round < e.broadcast_round + 1 || e.delivery_round > e.broadcast_round + T_)
            throw NetworkError("delivery outside the delay window");
        tree.for_each_link(e.block, false, [&](BlockId link) {
            const auto at = views.planned(link, e.recipient);
            if (at == kNever) throw NetworkError("linked block was never broadcast");
            e.delivery_round = std::max<std::int64_t>(e.delivery_round, at);
        });
        if (std::size_t(e.delivery_round) >= buckets_.size()) buckets_.resize(e.delivery_round + 1);
        views.plan(e.block, e.recipient, e.delivery_round);
        buckets_[e.delivery_round].push_back(e);
    }
}

std::vector<DeliveryEvent> Network::deliver(std::int64_t round)
{
    if (round < 0 || std::size_t(round) >= buckets_.size()) return {};
    std::vector<DeliveryEvent> out = std::move(buckets_[round]);
    buckets_[round].clear();
    std::sort(out.begin(), out.end(), [](const DeliveryEvent& a, const DeliveryEvent& b) {
        // A miner hears its own block before anything else from the same round.
        const bool a_other = a.sender != a.recipient, b_other = b.sender != b.recipient;
        return std::tie(a.broadcast_round, a_other, a.block, a.recipient) <
               std::tie(b.broadcast_round, b_other, b.block, b.recipient);
    });
    return out;
}

std::size_t Network::pending() const
{
    std::size_t n = 0;
    for (const auto& b : buckets_) n += b.size();
    return n;
}

} // namespace backbone
