#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hytegrid/buffer.hpp"
#include "hytegrid/mesh.hpp"
#include "hytegrid/transport.hpp"

namespace hytegrid {

/// Runtime macro-primitive: setup metadata plus attached data records keyed
/// by handle id. Data contents are opaque here; the domain's registry holds
/// the (de-)serialization callbacks.
class Primitive {
  public:
    Primitive(PrimitiveID id_, PrimitiveKind kind_, std::variant<VertexInfo, EdgeInfo, FaceInfo> info_)
        : id(id_), kind(kind_), info(std::move(info_)) {}

    PrimitiveID id;
    PrimitiveKind kind;
    std::variant<VertexInfo, EdgeInfo, FaceInfo> info;
    std::map<std::uint32_t, std::any> data;

    const VertexInfo& vertex() const { return std::get<VertexInfo>(info); }
    const EdgeInfo& edge() const { return std::get<EdgeInfo>(info); }
    const FaceInfo& face() const { return std::get<FaceInfo>(info); }

    /// Graph-neighbors (adjacent dimension only): a vertex lists its edges,
    /// an edge its endpoints and faces, a face its three edges.
    std::vector<PrimitiveID> neighbor_ids() const;
};

void serialize_info(const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, MessageBuffer& buf);
std::variant<VertexInfo, EdgeInfo, FaceInfo> deserialize_info(PrimitiveKind kind, MessageBuffer& buf);

/// One logical rank's share of the primitive graph. rank_of covers exactly
/// the local primitives and their graph-neighbors — no rank stores global
/// topology.
struct DistributedGraph {
    int rank = 0;
    std::map<PrimitiveID, Primitive> local;
    std::map<PrimitiveID, int> rank_of;

    bool is_local(PrimitiveID id) const { return local.count(id) > 0; }
};

/// Opaque reference to a registered data attachment.
struct DataHandle {
    std::uint32_t id = 0;
};

/// P logical ranks in one process, interacting only through the transport.
/// Construction distributes a SetupGraph by the given total assignment.
class DistributedDomain {
  public:
    struct DataCallbacks {
        std::function<std::any(const Primitive&)> init;
        std::function<void(const std::any&, MessageBuffer&)> serialize;
        std::function<std::any(MessageBuffer&)> deserialize;
    };

    DistributedDomain(const SetupGraph& setup, const std::map<PrimitiveID, int>& assignment, int ranks);

    int ranks() const { return static_cast<int>(graphs_.size()); }
    DistributedGraph& graph(int rank) { return graphs_.at(static_cast<std::size_t>(rank)); }
    const DistributedGraph& graph(int rank) const { return graphs_.at(static_cast<std::size_t>(rank)); }
    Transport& transport() { return transport_; }

    /// Registers callbacks under a caller-chosen id (also the message channel
    /// for this attachment) and initializes data on every local primitive.
    DataHandle add_data(std::uint32_t id, DataCallbacks callbacks);

    /// Fresh channel id, guaranteed to collide with no registered attachment.
    std::uint32_t allocate_channel() { return next_channel_++; }

    const DataCallbacks& callbacks(DataHandle h) const;

    /// Orchestration helpers (domain scope, not rank scope).
    int owner(PrimitiveID id) const;
    Primitive& primitive(PrimitiveID id);
    const Primitive& primitive(PrimitiveID id) const;

    /// Moves one primitive with all attached data to `target`, serialized
    /// through the transport; the owner notifies every rank holding a
    /// neighbor so all rank_of maps stay exact.
    void migrate(PrimitiveID id, int target);

  private:
    std::vector<DistributedGraph> graphs_;
    Transport transport_;
    std::map<std::uint32_t, DataCallbacks> registry_;
    std::uint32_t next_channel_ = 1;
};

/// Typed access to an attached datum; throws if the handle was never
/// registered or the primitive holds no datum under it.
std::any& primitive_data(Primitive& p, DataHandle h);
const std::any& primitive_data(const Primitive& p, DataHandle h);

template <class T> T& data_as(Primitive& p, DataHandle h) { return std::any_cast<T&>(primitive_data(p, h)); }
template <class T> const T& data_as(const Primitive& p, DataHandle h) {
    return std::any_cast<const T&>(primitive_data(p, h));
}

} // namespace hytegrid
