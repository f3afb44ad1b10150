#include "hytegrid/transport.hpp"

#include <stdexcept>
#include <string>

namespace hytegrid {

const char* to_string(Direction d) {
    switch (d) {
    case Direction::VERTEX_TO_EDGE: return "VERTEX_TO_EDGE";
    case Direction::EDGE_TO_FACE: return "EDGE_TO_FACE";
    case Direction::FACE_TO_EDGE: return "FACE_TO_EDGE";
    case Direction::EDGE_TO_VERTEX: return "EDGE_TO_VERTEX";
    case Direction::MIGRATION: return "MIGRATION";
    case Direction::REDUCTION: return "REDUCTION";
    }
    return "?";
}

void Transport::send(int source, int destination, const Tag& tag, MessageBuffer&& buffer) {
    if (observer_)
        observer_(source, destination, tag, buffer);
    queues_[{destination, tag}].push_back({source, std::move(buffer)});
}

Transport::Received Transport::receive(int destination, const Tag& tag) {
    const auto it = queues_.find({destination, tag});
    if (it == queues_.end() || it->second.empty())
        throw std::runtime_error("transport: no message for rank " + std::to_string(destination) + ", tag (" +
                                 std::to_string(tag.sender.value) + " -> " + std::to_string(tag.receiver.value) +
                                 ", " + to_string(tag.direction) + ", channel " + std::to_string(tag.channel) + ")");
    Received r = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty())
        queues_.erase(it);
    return r;
}

bool Transport::has_message(int destination, const Tag& tag) const {
    const auto it = queues_.find({destination, tag});
    return it != queues_.end() && !it->second.empty();
}

std::size_t Transport::pending() const {
    std::size_t n = 0;
    for (const auto& [key, q] : queues_)
        n += q.size();
    return n;
}

} // namespace hytegrid
