#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "hytegrid/indexing.hpp"
#include "hytegrid/layout.hpp"
#include "hytegrid/primitives.hpp"
#include "hytegrid/transport.hpp"

namespace hytegrid {

/// (De-)serialization of one ghost exchange. pack() writes the sender's
/// contribution for one receiving neighbor; unpack() scatters a received
/// buffer into the receiver's ghost slots; local_copy() must leave the
/// receiver exactly as pack() + unpack() would (here it literally is that
/// composition). The primitive of higher dimension performs the orientation
/// adjustment: faces pack borders in the edge's direction and unscramble
/// received lines themselves, so edges and vertices always read and write
/// consecutively.
class PackInfo {
  public:
    virtual ~PackInfo() = default;

    virtual void pack(const Primitive& sender, PrimitiveID receiver, Direction dir, int level,
                      MessageBuffer& out) const = 0;
    virtual void unpack(Primitive& receiver, PrimitiveID sender, Direction dir, int level,
                        MessageBuffer& in) const = 0;

    void local_copy(const Primitive& sender, Primitive& receiver, Direction dir, int level) const;
};

/// Ghost-layer synchronization driver. Holds the PackInfo per channel and
/// walks the macro-primitive graph edges of a direction; co-resident pairs
/// use local_copy, remote pairs go through the transport. Communication only
/// ever runs between adjacent dimensions.
class Controller {
  public:
    explicit Controller(DistributedDomain& domain) : domain_(domain) {}

    void register_pack_info(std::uint32_t channel, std::shared_ptr<const PackInfo> info);

    /// Runs the given directions in order; within one direction all sends of
    /// all ranks complete before any receive (deterministic phase schedule).
    void sync(std::uint32_t channel, int level, std::span<const Direction> directions);
    void sync(std::uint32_t channel, int level, Direction direction);

    DistributedDomain& domain() { return domain_; }

  private:
    DistributedDomain& domain_;
    std::map<std::uint32_t, std::shared_ptr<const PackInfo>> infos_;
};

/// Directions of a full ghost refresh, ordered so that every relayed copy is
/// refreshed before it is forwarded (see the dependency analysis in
/// communication.cpp). Nodal kinds: V->E, E->F, F->E, E->V; cell fields skip
/// the vertex-to-edge step (vertices hold no cell data of their own).
std::span<const Direction> full_sync_schedule(FunctionKind kind);

PrimitiveKind sender_kind(Direction d);
PrimitiveKind receiver_kind(Direction d);

// ---------------------------------------------------------------------------
// Field exchange for one scalar field stored under a data handle (see
// FieldData in field.hpp and the storage layout in layout.hpp).
// ---------------------------------------------------------------------------

class FieldPackInfo : public PackInfo {
  public:
    FieldPackInfo(DataHandle handle, FunctionKind kind, TriangleLayout layout)
        : handle_(handle), kind_(kind), layout_(layout) {}

    void pack(const Primitive& sender, PrimitiveID receiver, Direction dir, int level,
              MessageBuffer& out) const override;
    void unpack(Primitive& receiver, PrimitiveID sender, Direction dir, int level,
                MessageBuffer& in) const override;

  private:
    DataHandle handle_;
    FunctionKind kind_;
    TriangleLayout layout_;
};

/// Border extraction/insertion used by FieldPackInfo, exposed for direct use:
/// appends the halo rows for `slot` (border mirrors first, then inner rows)
/// walk-ordered by `orientation`, as one length-prefixed f64 sequence.
void pack_face_border(const std::vector<double>& face_values, FunctionKind kind,
                      const TriangleLayout& layout, int level, int slot, Orientation orientation,
                      MessageBuffer& out);

/// Consecutively reads one pack_face_border() message into the halo block of
/// the edge's neighbor `face_id`. Throws if `face_id` is not a neighbor or
/// the row lengths disagree with the slot stored for it.
void unpack_edge_halo(std::vector<double>& edge_values, FunctionKind kind, int level,
                      const EdgeInfo& edge, PrimitiveID face_id, MessageBuffer& in);

} // namespace hytegrid
