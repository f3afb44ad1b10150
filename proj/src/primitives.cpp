#include "hytegrid/primitives.hpp"

#include <algorithm>
#include <set>

namespace hytegrid {

std::vector<PrimitiveID> Primitive::neighbor_ids() const {
    std::vector<PrimitiveID> out;
    switch (kind) {
    case PrimitiveKind::VERTEX:
        out = vertex().edges;
        break;
    case PrimitiveKind::EDGE: {
        const auto& e = edge();
        out.assign(e.vertices.begin(), e.vertices.end());
        for (const auto& f : e.faces)
            out.push_back(f.id);
        break;
    }
    case PrimitiveKind::FACE: {
        const auto& f = face();
        out.assign(f.edges.begin(), f.edges.end());
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metadata serialization (field by field, little-endian via MessageBuffer).
// ---------------------------------------------------------------------------

namespace {

void put_vec2(MessageBuffer& b, Vec2 v) {
    b.put_f64(v.x);
    b.put_f64(v.y);
}
Vec2 get_vec2(MessageBuffer& b) {
    Vec2 v;
    v.x = b.get_f64();
    v.y = b.get_f64();
    return v;
}

void put_face_neighbor(MessageBuffer& b, const FaceNeighborInfo& n) {
    b.put_u64(n.id.value);
    for (const auto& c : n.corners)
        put_vec2(b, c);
    b.put_i64(n.slot);
    b.put_u8(n.aligned ? 1 : 0);
    for (int m : n.edge_markers)
        b.put_i64(m);
    for (int m : n.vertex_markers)
        b.put_i64(m);
}
FaceNeighborInfo get_face_neighbor(MessageBuffer& b) {
    FaceNeighborInfo n;
    n.id.value = b.get_u64();
    for (auto& c : n.corners)
        c = get_vec2(b);
    n.slot = static_cast<int>(b.get_i64());
    n.aligned = b.get_u8() != 0;
    for (int& m : n.edge_markers)
        m = static_cast<int>(b.get_i64());
    for (int& m : n.vertex_markers)
        m = static_cast<int>(b.get_i64());
    return n;
}

void put_vertex_info(MessageBuffer& b, const VertexInfo& v) {
    put_vec2(b, v.coord);
    b.put_i64(v.marker);
    b.put_u64(v.edges.size());
    for (const auto& e : v.edges)
        b.put_u64(e.value);
    b.put_u64(v.edge_markers.size());
    for (int m : v.edge_markers)
        b.put_i64(m);
    b.put_u64(v.edge_far_markers.size());
    for (int m : v.edge_far_markers)
        b.put_i64(m);
    b.put_u64(v.faces.size());
    for (const auto& f : v.faces) {
        b.put_u64(f.id.value);
        for (const auto& c : f.corners)
            put_vec2(b, c);
        b.put_i64(f.corner_idx);
        b.put_u64(f.flank_edges[0].value);
        b.put_u64(f.flank_edges[1].value);
        for (int m : f.edge_markers)
            b.put_i64(m);
    }
}
VertexInfo get_vertex_info(MessageBuffer& b) {
    VertexInfo v;
    v.coord = get_vec2(b);
    v.marker = static_cast<int>(b.get_i64());
    v.edges.resize(b.get_u64());
    for (auto& e : v.edges)
        e.value = b.get_u64();
    v.edge_markers.resize(b.get_u64());
    for (int& m : v.edge_markers)
        m = static_cast<int>(b.get_i64());
    v.edge_far_markers.resize(b.get_u64());
    for (int& m : v.edge_far_markers)
        m = static_cast<int>(b.get_i64());
    v.faces.resize(b.get_u64());
    for (auto& f : v.faces) {
        f.id.value = b.get_u64();
        for (auto& c : f.corners)
            c = get_vec2(b);
        f.corner_idx = static_cast<int>(b.get_i64());
        f.flank_edges[0].value = b.get_u64();
        f.flank_edges[1].value = b.get_u64();
        for (int& m : f.edge_markers)
            m = static_cast<int>(b.get_i64());
    }
    return v;
}

void put_edge_info(MessageBuffer& b, const EdgeInfo& e) {
    b.put_u64(e.vertices[0].value);
    b.put_u64(e.vertices[1].value);
    put_vec2(b, e.coords[0]);
    put_vec2(b, e.coords[1]);
    b.put_i64(e.vertex_markers[0]);
    b.put_i64(e.vertex_markers[1]);
    b.put_i64(e.marker);
    b.put_u64(e.faces.size());
    for (const auto& f : e.faces)
        put_face_neighbor(b, f);
}
EdgeInfo get_edge_info(MessageBuffer& b) {
    EdgeInfo e;
    e.vertices[0].value = b.get_u64();
    e.vertices[1].value = b.get_u64();
    e.coords[0] = get_vec2(b);
    e.coords[1] = get_vec2(b);
    e.vertex_markers[0] = static_cast<int>(b.get_i64());
    e.vertex_markers[1] = static_cast<int>(b.get_i64());
    e.marker = static_cast<int>(b.get_i64());
    e.faces.resize(b.get_u64());
    for (auto& f : e.faces)
        f = get_face_neighbor(b);
    return e;
}

void put_face_info(MessageBuffer& b, const FaceInfo& f) {
    for (const auto& v : f.vertices)
        b.put_u64(v.value);
    for (const auto& c : f.coords)
        put_vec2(b, c);
    for (int m : f.vertex_markers)
        b.put_i64(m);
    for (const auto& e : f.edges)
        b.put_u64(e.value);
    for (bool a : f.edge_aligned)
        b.put_u8(a ? 1 : 0);
    for (int m : f.edge_markers)
        b.put_i64(m);
    b.put_i64(f.region);
}
FaceInfo get_face_info(MessageBuffer& b) {
    FaceInfo f;
    for (auto& v : f.vertices)
        v.value = b.get_u64();
    for (auto& c : f.coords)
        c = get_vec2(b);
    for (int& m : f.vertex_markers)
        m = static_cast<int>(b.get_i64());
    for (auto& e : f.edges)
        e.value = b.get_u64();
    for (std::size_t s = 0; s < 3; ++s)
        f.edge_aligned[s] = b.get_u8() != 0;
    for (int& m : f.edge_markers)
        m = static_cast<int>(b.get_i64());
    f.region = static_cast<int>(b.get_i64());
    return f;
}

} // namespace

void serialize_info(const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, MessageBuffer& buf) {
    std::visit(
        [&](const auto& i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, VertexInfo>)
                put_vertex_info(buf, i);
            else if constexpr (std::is_same_v<T, EdgeInfo>)
                put_edge_info(buf, i);
            else
                put_face_info(buf, i);
        },
        info);
}

std::variant<VertexInfo, EdgeInfo, FaceInfo> deserialize_info(PrimitiveKind kind, MessageBuffer& buf) {
    switch (kind) {
    case PrimitiveKind::VERTEX: return get_vertex_info(buf);
    case PrimitiveKind::EDGE: return get_edge_info(buf);
    case PrimitiveKind::FACE: return get_face_info(buf);
    }
    throw std::invalid_argument("deserialize_info: bad primitive kind");
}

// ---------------------------------------------------------------------------
// DistributedDomain
// ---------------------------------------------------------------------------

DistributedDomain::DistributedDomain(const SetupGraph& setup, const std::map<PrimitiveID, int>& assignment,
                                     int ranks) {
    if (ranks < 1)
        throw std::invalid_argument("distribute: need at least one rank");
    graphs_.resize(static_cast<std::size_t>(ranks));
    for (int r = 0; r < ranks; ++r)
        graphs_[static_cast<std::size_t>(r)].rank = r;

    auto rank_of = [&](PrimitiveID id) {
        const auto it = assignment.find(id);
        if (it == assignment.end())
            throw std::invalid_argument("distribute: unassigned primitive " + std::to_string(id.value));
        if (it->second < 0 || it->second >= ranks)
            throw std::invalid_argument("distribute: rank " + std::to_string(it->second) + " for primitive " +
                                        std::to_string(id.value) + " out of range [0, " + std::to_string(ranks) +
                                        ")");
        return it->second;
    };

    for (const auto& sp : setup.primitives) {
        const int r = rank_of(sp.id);
        auto& g = graphs_[static_cast<std::size_t>(r)];
        Primitive p(sp.id, sp.kind, sp.info);
        g.rank_of[sp.id] = r;
        for (const auto& n : p.neighbor_ids())
            g.rank_of[n] = rank_of(n);
        g.local.emplace(sp.id, std::move(p));
    }
}

DataHandle DistributedDomain::add_data(std::uint32_t id, DataCallbacks callbacks) {
    if (registry_.count(id))
        throw std::invalid_argument("add_data: handle id " + std::to_string(id) + " already registered");
    if (!callbacks.init || !callbacks.serialize || !callbacks.deserialize)
        throw std::invalid_argument("add_data: all three callbacks are required");
    const auto& entry = registry_.emplace(id, std::move(callbacks)).first->second;
    next_channel_ = std::max(next_channel_, id + 1);
    for (auto& g : graphs_)
        for (auto& [pid, prim] : g.local)
            prim.data.emplace(id, entry.init(prim));
    return DataHandle{id};
}

const DistributedDomain::DataCallbacks& DistributedDomain::callbacks(DataHandle h) const {
    const auto it = registry_.find(h.id);
    if (it == registry_.end())
        throw std::invalid_argument("data handle " + std::to_string(h.id) + " not registered");
    return it->second;
}

int DistributedDomain::owner(PrimitiveID id) const {
    for (const auto& g : graphs_)
        if (g.is_local(id))
            return g.rank;
    throw std::invalid_argument("unknown primitive " + std::to_string(id.value));
}

Primitive& DistributedDomain::primitive(PrimitiveID id) {
    return graphs_[static_cast<std::size_t>(owner(id))].local.at(id);
}

const Primitive& DistributedDomain::primitive(PrimitiveID id) const {
    return graphs_[static_cast<std::size_t>(owner(id))].local.at(id);
}

void DistributedDomain::migrate(PrimitiveID id, int target) {
    const int source = owner(id); // throws for unknown ids
    if (target < 0 || target >= ranks())
        throw std::invalid_argument("migrate: target rank " + std::to_string(target) + " out of range");
    if (target == source)
        return;

    auto& sg = graphs_[static_cast<std::size_t>(source)];
    auto& tg = graphs_[static_cast<std::size_t>(target)];
    Primitive& prim = sg.local.at(id);
    const std::vector<PrimitiveID> neighbors = prim.neighbor_ids();

    // Payload: metadata, attached data (serializer per handle), and the
    // owner's rank knowledge about the neighbors, which the target needs to
    // satisfy the rank_of coverage invariant.
    MessageBuffer payload;
    payload.put_u64(prim.id.value);
    payload.put_u8(static_cast<std::uint8_t>(prim.kind));
    serialize_info(prim.info, payload);
    payload.put_u64(prim.data.size());
    for (const auto& [hid, datum] : prim.data) {
        const auto reg = registry_.find(hid);
        if (reg == registry_.end())
            throw std::invalid_argument("migrate: datum with unregistered handle " + std::to_string(hid));
        payload.put_u32(hid);
        reg->second.serialize(datum, payload);
    }
    payload.put_u64(neighbors.size());
    for (const auto& n : neighbors) {
        payload.put_u64(n.value);
        payload.put_u64(static_cast<std::uint64_t>(sg.rank_of.at(n)));
    }
    transport_.send(source, target, Tag{id, id, Direction::MIGRATION, 0}, std::move(payload));

    // Notify every other rank that owns a neighbor of the moved primitive.
    std::set<int> watchers;
    for (const auto& n : neighbors)
        watchers.insert(sg.rank_of.at(n));
    watchers.erase(source);
    watchers.erase(target);
    for (int w : watchers) {
        MessageBuffer note;
        note.put_u64(id.value);
        note.put_u64(static_cast<std::uint64_t>(target));
        transport_.send(source, w, Tag{id, id, Direction::MIGRATION, 1}, std::move(note));
    }

    // Target materializes the primitive.
    {
        auto [src, buf] = transport_.receive(target, Tag{id, id, Direction::MIGRATION, 0});
        PrimitiveID rid{buf.get_u64()};
        const auto kind = static_cast<PrimitiveKind>(buf.get_u8());
        Primitive moved(rid, kind, deserialize_info(kind, buf));
        const std::uint64_t ndata = buf.get_u64();
        for (std::uint64_t i = 0; i < ndata; ++i) {
            const std::uint32_t hid = buf.get_u32();
            moved.data.emplace(hid, registry_.at(hid).deserialize(buf));
        }
        const std::uint64_t nnbr = buf.get_u64();
        for (std::uint64_t i = 0; i < nnbr; ++i) {
            PrimitiveID n{buf.get_u64()};
            tg.rank_of[n] = static_cast<int>(buf.get_u64());
        }
        if (!buf.fully_consumed())
            throw std::runtime_error("migrate: trailing bytes in payload");
        tg.local.insert_or_assign(rid, std::move(moved));
        tg.rank_of[rid] = target;
    }

    // Watchers update their rank maps.
    for (int w : watchers) {
        auto [src, buf] = transport_.receive(w, Tag{id, id, Direction::MIGRATION, 1});
        PrimitiveID nid{buf.get_u64()};
        graphs_[static_cast<std::size_t>(w)].rank_of[nid] = static_cast<int>(buf.get_u64());
    }

    // Source drops the primitive and prunes rank_of back to exact coverage
    // (local primitives and their neighbors).
    sg.local.erase(id);
    std::set<PrimitiveID> keep;
    for (const auto& [pid, p] : sg.local) {
        keep.insert(pid);
        for (const auto& n : p.neighbor_ids())
            keep.insert(n);
    }
    for (auto it = sg.rank_of.begin(); it != sg.rank_of.end();) {
        if (!keep.count(it->first))
            it = sg.rank_of.erase(it);
        else
            ++it;
    }
    if (keep.count(id))
        sg.rank_of[id] = target;
}

std::any& primitive_data(Primitive& p, DataHandle h) {
    const auto it = p.data.find(h.id);
    if (it == p.data.end())
        throw std::invalid_argument("primitive " + std::to_string(p.id.value) + " holds no datum for handle " +
                                    std::to_string(h.id));
    return it->second;
}

const std::any& primitive_data(const Primitive& p, DataHandle h) {
    const auto it = p.data.find(h.id);
    if (it == p.data.end())
        throw std::invalid_argument("primitive " + std::to_string(p.id.value) + " holds no datum for handle " +
                                    std::to_string(h.id));
    return it->second;
}

} // namespace hytegrid
