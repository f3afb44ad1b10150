#include "hytegrid/communication.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "hytegrid/field.hpp"

namespace hytegrid {

PrimitiveKind sender_kind(Direction d) {
    switch (d) {
    case Direction::VERTEX_TO_EDGE: return PrimitiveKind::VERTEX;
    case Direction::EDGE_TO_FACE: return PrimitiveKind::EDGE;
    case Direction::FACE_TO_EDGE: return PrimitiveKind::FACE;
    case Direction::EDGE_TO_VERTEX: return PrimitiveKind::EDGE;
    default: throw std::invalid_argument("sender_kind: not a sync direction");
    }
}

PrimitiveKind receiver_kind(Direction d) {
    switch (d) {
    case Direction::VERTEX_TO_EDGE: return PrimitiveKind::EDGE;
    case Direction::EDGE_TO_FACE: return PrimitiveKind::FACE;
    case Direction::FACE_TO_EDGE: return PrimitiveKind::EDGE;
    case Direction::EDGE_TO_VERTEX: return PrimitiveKind::VERTEX;
    default: throw std::invalid_argument("receiver_kind: not a sync direction");
    }
}

// ---------------------------------------------------------------------------
// Why this direction order. Several ghost slots do not mirror data of the
// sending primitive itself but values the sender merely holds as a copy:
//
//   * a face's border corners are vertex values, relayed inside the
//     edge-to-face line message (the line ends are the edge's endpoint
//     copies);
//   * an edge's halo block contains face lattice rows whose on-line entries
//     mirror sibling edges and whose crossing-row ends can mirror other
//     edges' midpoints (quadratic fields, coarse levels);
//   * a vertex's corner ghosts (quadratic midpoints, corner cells) are face
//     values relayed by a flanking edge out of that edge's halo block.
//
// A relayed copy is owner-current only if the forwarding primitive refreshed
// its own copy earlier in the same schedule. That forces
//
//   vertex->edge, edge->face, face->edge, edge->vertex
//
// (each stage forwards only data refreshed by an earlier stage), and for cell
// fields, where vertices own nothing, face->edge, edge->face, edge->vertex.
// Any other permutation leaves at least one ghost one refresh behind.
// ---------------------------------------------------------------------------
std::span<const Direction> full_sync_schedule(FunctionKind kind) {
    static constexpr std::array<Direction, 4> nodal{
        Direction::VERTEX_TO_EDGE, Direction::EDGE_TO_FACE, Direction::FACE_TO_EDGE,
        Direction::EDGE_TO_VERTEX};
    static constexpr std::array<Direction, 3> cell{
        Direction::FACE_TO_EDGE, Direction::EDGE_TO_FACE, Direction::EDGE_TO_VERTEX};
    return kind == FunctionKind::DG0 ? std::span<const Direction>(cell)
                                     : std::span<const Direction>(nodal);
}

void PackInfo::local_copy(const Primitive& sender, Primitive& receiver, Direction dir,
                          int level) const {
    MessageBuffer buf;
    pack(sender, receiver.id, dir, level, buf);
    unpack(receiver, sender.id, dir, level, buf);
    if (!buf.fully_consumed())
        throw std::logic_error("local_copy: unpack left " + std::to_string(buf.remaining()) +
                               " bytes unread (direction " + to_string(dir) + ")");
}

void Controller::register_pack_info(std::uint32_t channel, std::shared_ptr<const PackInfo> info) {
    if (!info)
        throw std::invalid_argument("register_pack_info: null PackInfo");
    infos_[channel] = std::move(info);
}

namespace {

std::vector<PrimitiveID> send_targets(const Primitive& p, Direction dir) {
    switch (dir) {
    case Direction::VERTEX_TO_EDGE: return p.vertex().edges;
    case Direction::EDGE_TO_FACE: {
        std::vector<PrimitiveID> out;
        for (const auto& f : p.edge().faces)
            out.push_back(f.id);
        return out;
    }
    case Direction::FACE_TO_EDGE: {
        const auto& f = p.face();
        return {f.edges.begin(), f.edges.end()};
    }
    case Direction::EDGE_TO_VERTEX: {
        const auto& e = p.edge();
        return {e.vertices.begin(), e.vertices.end()};
    }
    default: throw std::invalid_argument("send_targets: not a sync direction");
    }
}

std::vector<PrimitiveID> receive_sources(const Primitive& p, Direction dir) {
    switch (dir) {
    case Direction::VERTEX_TO_EDGE: {
        const auto& e = p.edge();
        return {e.vertices.begin(), e.vertices.end()};
    }
    case Direction::EDGE_TO_FACE: {
        const auto& f = p.face();
        return {f.edges.begin(), f.edges.end()};
    }
    case Direction::FACE_TO_EDGE: {
        std::vector<PrimitiveID> out;
        for (const auto& f : p.edge().faces)
            out.push_back(f.id);
        return out;
    }
    case Direction::EDGE_TO_VERTEX: return p.vertex().edges;
    default: throw std::invalid_argument("receive_sources: not a sync direction");
    }
}

} // namespace

void Controller::sync(std::uint32_t channel, int level, std::span<const Direction> directions) {
    const auto it = infos_.find(channel);
    if (it == infos_.end())
        throw std::invalid_argument("sync: no PackInfo registered for channel " +
                                    std::to_string(channel));
    const PackInfo& info = *it->second;
    const int ranks = domain_.ranks();
    for (const Direction dir : directions) {
        const PrimitiveKind skind = sender_kind(dir);
        const PrimitiveKind rkind = receiver_kind(dir);
        // Phase 1: every rank posts its remote sends (non-blocking).
        for (int r = 0; r < ranks; ++r) {
            auto& g = domain_.graph(r);
            for (auto& [id, prim] : g.local) {
                if (prim.kind != skind)
                    continue;
                for (const PrimitiveID nb : send_targets(prim, dir)) {
                    const int target = g.rank_of.at(nb);
                    if (target == r)
                        continue;
                    MessageBuffer out;
                    info.pack(prim, nb, dir, level, out);
                    domain_.transport().send(r, target, Tag{id, nb, dir, channel}, std::move(out));
                }
            }
        }
        // Phase 2: receives and co-resident copies, receiver-driven.
        for (int r = 0; r < ranks; ++r) {
            auto& g = domain_.graph(r);
            for (auto& [id, prim] : g.local) {
                if (prim.kind != rkind)
                    continue;
                for (const PrimitiveID src : receive_sources(prim, dir)) {
                    if (g.is_local(src)) {
                        info.local_copy(g.local.at(src), prim, dir, level);
                    } else {
                        auto rec = domain_.transport().receive(r, Tag{src, id, dir, channel});
                        info.unpack(prim, src, dir, level, rec.buffer);
                        if (!rec.buffer.fully_consumed())
                            throw std::logic_error("sync: message from " + std::to_string(src.value) +
                                                   " to " + std::to_string(id.value) + " (" +
                                                   to_string(dir) + ") not fully consumed");
                    }
                }
            }
        }
    }
}

void Controller::sync(std::uint32_t channel, int level, Direction direction) {
    sync(channel, level, std::span<const Direction>(&direction, 1));
}

// ---------------------------------------------------------------------------
// Field pack/unpack.
// ---------------------------------------------------------------------------

namespace {

/// Local corner indices (start, end) of a slot's border walk.
constexpr std::array<std::array<int, 2>, 3> kSlotCorners{{{0, 1}, {0, 2}, {1, 2}}};

/// Group of the midpoint opposite a face corner in the corner micro-element.
DoFGroup corner_opposite_group(int corner_idx) {
    switch (corner_idx) {
    case 0: return DoFGroup::EDGE_DIAGONAL;
    case 1: return DoFGroup::EDGE_VERTICAL;
    case 2: return DoFGroup::EDGE_HORIZONTAL;
    default: throw std::out_of_range("corner_opposite_group: corner " + std::to_string(corner_idx));
    }
}

std::size_t face_index_of(const EdgeInfo& e, PrimitiveID face_id, const char* who) {
    for (std::size_t i = 0; i < e.faces.size(); ++i)
        if (e.faces[i].id == face_id)
            return i;
    throw std::invalid_argument(std::string(who) + ": face " + std::to_string(face_id.value) +
                                " is not a neighbor of this edge");
}

int line_end_of(const EdgeInfo& e, PrimitiveID vertex_id, const char* who) {
    if (vertex_id == e.vertices[0])
        return 0;
    if (vertex_id == e.vertices[1])
        return 1;
    throw std::invalid_argument(std::string(who) + ": vertex " + std::to_string(vertex_id.value) +
                                " is not an endpoint of this edge");
}

int slot_of(const FaceInfo& f, PrimitiveID edge_id, const char* who) {
    for (int s = 0; s < 3; ++s)
        if (f.edges[static_cast<std::size_t>(s)] == edge_id)
            return s;
    throw std::invalid_argument(std::string(who) + ": edge " + std::to_string(edge_id.value) +
                                " is not an edge of this face");
}

/// Value a flanking edge forwards to its endpoint vertex for one adjacent
/// face: the corner cell (cell fields) or the corner element's interior
/// midpoint (quadratic fields), taken from the edge's halo block. Halo rows
/// run in the edge's own direction, so line end 0 maps to the first entry
/// and line end 1 to the last, for any orientation.
double corner_ghost_from_halo(const std::vector<double>& vals, FunctionKind kind, int level,
                              const EdgeInfo& e, std::size_t face_idx, int line_end) {
    const auto& nb = e.faces[face_idx];
    DoFGroup g = DoFGroup::FACE_UP;
    if (kind == FunctionKind::P2) {
        const int walk_end = ((line_end == 0) == nb.aligned) ? 0 : 1;
        const int corner = kSlotCorners[static_cast<std::size_t>(nb.slot)][static_cast<std::size_t>(walk_end)];
        g = corner_opposite_group(corner);
    }
    const std::size_t off = edge_halo_offset(kind, level, e, face_idx) +
                            edge_halo_row_offset(kind, level, nb.slot, g, 0);
    const int len = border_row_length(g, level, 0);
    return vals.at(off + (line_end == 0 ? 0 : static_cast<std::size_t>(len - 1)));
}

} // namespace

void pack_face_border(const std::vector<double>& face_values, FunctionKind kind,
                      const TriangleLayout& layout, int level, int slot, Orientation orientation,
                      MessageBuffer& out) {
    if (slot < 0 || slot > 2)
        throw std::out_of_range("pack_face_border: slot " + std::to_string(slot));
    std::vector<double> msg;
    for (const HaloRow& row : edge_halo_rows(kind, slot)) {
        const std::size_t goff = face_group_offset(kind, level, row.group);
        for (const std::size_t i : border_indices(layout, level, row.group, slot, orientation, row.offset))
            msg.push_back(face_values.at(goff + i));
    }
    out.put_f64_span(msg);
}

void unpack_edge_halo(std::vector<double>& edge_values, FunctionKind kind, int level,
                      const EdgeInfo& edge, PrimitiveID face_id, MessageBuffer& in) {
    const std::size_t fi = face_index_of(edge, face_id, "unpack_edge_halo");
    const auto msg = in.get_f64_vector();
    const std::size_t expect = edge_halo_block_size(kind, level, edge.faces[fi].slot);
    if (msg.size() != expect)
        throw std::invalid_argument("unpack_edge_halo: got " + std::to_string(msg.size()) +
                                    " values, slot " + std::to_string(edge.faces[fi].slot) +
                                    " expects " + std::to_string(expect));
    std::copy(msg.begin(), msg.end(),
              edge_values.begin() + static_cast<std::ptrdiff_t>(edge_halo_offset(kind, level, edge, fi)));
}

void FieldPackInfo::pack(const Primitive& sender, PrimitiveID receiver, Direction dir, int level,
                         MessageBuffer& out) const {
    const auto& vals = field_values(sender, handle_, level);
    const int n = micro_edges_per_edge(level);
    switch (dir) {
    case Direction::VERTEX_TO_EDGE: {
        if (kind_ == FunctionKind::DG0) {
            out.put_f64_span({});
            return;
        }
        out.put_f64_span(std::span<const double>(vals.data(), 1));
        return;
    }
    case Direction::EDGE_TO_FACE: {
        const auto& e = sender.edge();
        const std::size_t fi = face_index_of(e, receiver, "pack");
        if (kind_ == FunctionKind::DG0) {
            // Forward the opposite face's border cells; nothing to forward at
            // a domain border.
            if (e.faces.size() < 2) {
                out.put_f64_span({});
                return;
            }
            const std::size_t opp = 1 - fi;
            const std::size_t off =
                edge_halo_offset(kind_, level, e, opp) +
                edge_halo_row_offset(kind_, level, e.faces[opp].slot, DoFGroup::FACE_UP, 0);
            out.put_f64_span(std::span<const double>(vals.data() + off, static_cast<std::size_t>(n)));
            return;
        }
        out.put_f64_span(std::span<const double>(vals.data(), edge_line_size(kind_, level)));
        return;
    }
    case Direction::FACE_TO_EDGE: {
        const auto& f = sender.face();
        const int slot = slot_of(f, receiver, "pack");
        const Orientation o = f.edge_aligned[static_cast<std::size_t>(slot)] ? Orientation::FORWARD
                                                                             : Orientation::REVERSED;
        pack_face_border(vals, kind_, layout_, level, slot, o, out);
        return;
    }
    case Direction::EDGE_TO_VERTEX: {
        const auto& e = sender.edge();
        const int end = line_end_of(e, receiver, "pack");
        std::vector<double> msg;
        if (kind_ != FunctionKind::DG0)
            msg.push_back(vals.at(end == 0 ? 1 : static_cast<std::size_t>(n - 1)));
        if (kind_ == FunctionKind::P2)
            msg.push_back(vals.at(edge_midline_offset(level) + (end == 0 ? 0 : static_cast<std::size_t>(n - 1))));
        if (kind_ != FunctionKind::P1)
            for (std::size_t fi = 0; fi < e.faces.size(); ++fi)
                msg.push_back(corner_ghost_from_halo(vals, kind_, level, e, fi, end));
        out.put_f64_span(msg);
        return;
    }
    default:
        throw std::invalid_argument("FieldPackInfo::pack: not a sync direction");
    }
}

void FieldPackInfo::unpack(Primitive& receiver, PrimitiveID sender, Direction dir, int level,
                           MessageBuffer& in) const {
    auto& vals = field_values(receiver, handle_, level);
    const int n = micro_edges_per_edge(level);
    switch (dir) {
    case Direction::VERTEX_TO_EDGE: {
        const auto msg = in.get_f64_vector();
        if (kind_ == FunctionKind::DG0)
            return;
        const int end = line_end_of(receiver.edge(), sender, "unpack");
        vals.at(end == 0 ? 0 : static_cast<std::size_t>(n)) = msg.at(0);
        return;
    }
    case Direction::EDGE_TO_FACE: {
        const auto& f = receiver.face();
        const int slot = slot_of(f, sender, "unpack");
        const bool aligned = f.edge_aligned[static_cast<std::size_t>(slot)];
        const auto msg = in.get_f64_vector();
        if (kind_ == FunctionKind::DG0) {
            if (msg.empty())
                return; // domain border: no opposite face
            const std::size_t base = face_halo_offset(level, slot);
            for (int k = 0; k < n; ++k)
                vals.at(base + static_cast<std::size_t>(aligned ? k : n - 1 - k)) =
                    msg.at(static_cast<std::size_t>(k));
            return;
        }
        const Orientation o = aligned ? Orientation::FORWARD : Orientation::REVERSED;
        const std::size_t voff = face_group_offset(kind_, level, DoFGroup::VERTEX);
        const auto vidx = border_indices(layout_, level, DoFGroup::VERTEX, slot, o, 0);
        for (std::size_t k = 0; k < vidx.size(); ++k)
            vals.at(voff + vidx[k]) = msg.at(k);
        if (kind_ == FunctionKind::P2) {
            const DoFGroup par = parallel_group(slot);
            const std::size_t poff = face_group_offset(kind_, level, par);
            const auto pidx = border_indices(layout_, level, par, slot, o, 0);
            for (std::size_t k = 0; k < pidx.size(); ++k)
                vals.at(poff + pidx[k]) = msg.at(vidx.size() + k);
        }
        return;
    }
    case Direction::FACE_TO_EDGE:
        unpack_edge_halo(vals, kind_, level, receiver.edge(), sender, in);
        return;
    case Direction::EDGE_TO_VERTEX: {
        const auto& v = receiver.vertex();
        const auto eit = std::find(v.edges.begin(), v.edges.end(), sender);
        if (eit == v.edges.end())
            throw std::invalid_argument("unpack: edge " + std::to_string(sender.value) +
                                        " is not incident to this vertex");
        const auto ei = static_cast<std::size_t>(eit - v.edges.begin());
        const auto msg = in.get_f64_vector();
        std::size_t j = 0;
        if (kind_ != FunctionKind::DG0)
            vals.at(vertex_edge_ghost_offset(kind_, ei)) = msg.at(j++);
        if (kind_ == FunctionKind::P2)
            vals.at(vertex_edge_ghost_offset(kind_, ei) + 1) = msg.at(j++);
        if (kind_ != FunctionKind::P1)
            for (std::size_t fi = 0; fi < v.faces.size(); ++fi) {
                const auto& flank = v.faces[fi].flank_edges;
                if (flank[0] == sender || flank[1] == sender)
                    vals.at(vertex_face_ghost_offset(kind_, v, fi)) = msg.at(j++);
            }
        if (j != msg.size())
            throw std::logic_error("unpack: vertex consumed " + std::to_string(j) + " of " +
                                   std::to_string(msg.size()) + " values");
        return;
    }
    default:
        throw std::invalid_argument("FieldPackInfo::unpack: not a sync direction");
    }
}

} // namespace hytegrid
