#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <utility>

#include "hytegrid/buffer.hpp"
#include "hytegrid/ids.hpp"

namespace hytegrid {

/// Communication directions along macro-primitive graph edges. Sync traffic
/// moves only between adjacent dimensions; MIGRATION carries whole primitives
/// between ranks and REDUCTION carries rank-level partial results; neither is
/// bound to a graph edge.
enum class Direction : std::uint8_t {
    VERTEX_TO_EDGE = 0,
    EDGE_TO_FACE = 1,
    FACE_TO_EDGE = 2,
    EDGE_TO_VERTEX = 3,
    MIGRATION = 4,
    REDUCTION = 5,
};

const char* to_string(Direction d);

/// Message identity: (sender, receiver, direction, channel) — the channel is
/// the data-handle id — so concurrent syncs of distinct fields or directions
/// can never interleave wrongly.
struct Tag {
    PrimitiveID sender;
    PrimitiveID receiver;
    Direction direction = Direction::VERTEX_TO_EDGE;
    std::uint32_t channel = 0;

    auto operator<=>(const Tag&) const = default;
};

/// In-process transport between logical ranks: per-(destination, tag) FIFO
/// queues. send() never blocks; receive() expects the message to be present
/// already, which the deterministic rank-round-robin phase schedule
/// guarantees (all sends of a phase run before its receives).
class Transport {
  public:
    struct Received {
        int source = 0;
        MessageBuffer buffer;
    };

    /// Called on every send with (source rank, destination rank, tag, payload).
    using Observer = std::function<void(int, int, const Tag&, const MessageBuffer&)>;

    void send(int source, int destination, const Tag& tag, MessageBuffer&& buffer);
    Received receive(int destination, const Tag& tag);
    bool has_message(int destination, const Tag& tag) const;

    /// Total queued messages; 0 after a completed schedule.
    std::size_t pending() const;

    void set_observer(Observer obs) { observer_ = std::move(obs); }

  private:
    std::map<std::pair<int, Tag>, std::deque<Received>> queues_;
    Observer observer_;
};

} // namespace hytegrid
