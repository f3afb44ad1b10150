#include "hytegrid/numbering.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hytegrid {

namespace {

struct OwnerSlot {
    PrimitiveID id;
    std::size_t slot = 0;
};

/// Midpoint DoF opposite a face corner in the corner micro-element.
TopoIndex corner_opposite(int level, int corner_idx) {
    const int n = micro_edges_per_edge(level);
    switch (corner_idx) {
    case 0: return {DoFGroup::EDGE_DIAGONAL, 0, 0};
    case 1: return {DoFGroup::EDGE_VERTICAL, n - 1, 0};
    case 2: return {DoFGroup::EDGE_HORIZONTAL, 0, n - 1};
    default: throw std::out_of_range("corner_opposite: corner " + std::to_string(corner_idx));
    }
}

/// Up-cell at a face corner (DG0 corner ghost source).
TopoIndex corner_cell(int level, int corner_idx) {
    const int n = micro_edges_per_edge(level);
    switch (corner_idx) {
    case 0: return {DoFGroup::FACE_UP, 0, 0};
    case 1: return {DoFGroup::FACE_UP, n - 1, 0};
    case 2: return {DoFGroup::FACE_UP, 0, n - 1};
    default: throw std::out_of_range("corner_cell: corner " + std::to_string(corner_idx));
    }
}

/// Owner of the DoF at edge-line position k (ends belong to the vertices).
OwnerSlot edge_line_owner(PrimitiveID eid, const EdgeInfo& e, int level, int k) {
    const int n = micro_edges_per_edge(level);
    if (k == 0)
        return {e.vertices[0], 0};
    if (k == n)
        return {e.vertices[1], 0};
    return {eid, static_cast<std::size_t>(k)};
}

/// Owner of a face-lattice DoF: corners belong to vertices, border rows to
/// the slot's edge (line/midline position translated through the alignment),
/// everything else to the face itself.
OwnerSlot face_dof_owner(PrimitiveID fid, const FaceInfo& f, FunctionKind kind, int level,
                         const TriangleLayout& layout, TopoIndex t) {
    const int n = micro_edges_per_edge(level);
    const auto self = [&]() -> OwnerSlot {
        return {fid, face_group_offset(kind, level, t.group) + linear_index(layout, level, t)};
    };
    const int c = t.col, r = t.row;
    switch (t.group) {
    case DoFGroup::VERTEX: {
        if (c == 0 && r == 0)
            return {f.vertices[0], 0};
        if (c == n && r == 0)
            return {f.vertices[1], 0};
        if (c == 0 && r == n)
            return {f.vertices[2], 0};
        int slot = -1;
        if (r == 0)
            slot = 0;
        else if (c == 0)
            slot = 1;
        else if (c + r == n)
            slot = 2;
        if (slot < 0)
            return self();
        const int w = slot == 0 ? c : r;
        const int k = f.edge_aligned[static_cast<std::size_t>(slot)] ? w : n - w;
        return {f.edges[static_cast<std::size_t>(slot)], static_cast<std::size_t>(k)};
    }
    case DoFGroup::EDGE_HORIZONTAL:
    case DoFGroup::EDGE_DIAGONAL:
    case DoFGroup::EDGE_VERTICAL: {
        int slot = -1;
        if (t.group == DoFGroup::EDGE_HORIZONTAL && r == 0)
            slot = 0;
        else if (t.group == DoFGroup::EDGE_VERTICAL && c == 0)
            slot = 1;
        else if (t.group == DoFGroup::EDGE_DIAGONAL && c + r == n - 1)
            slot = 2;
        if (slot < 0)
            return self();
        const int w = slot == 0 ? c : r;
        const int m = f.edge_aligned[static_cast<std::size_t>(slot)] ? w : n - 1 - w;
        return {f.edges[static_cast<std::size_t>(slot)],
                edge_midline_offset(level) + static_cast<std::size_t>(m)};
    }
    case DoFGroup::FACE_UP:
    case DoFGroup::FACE_DOWN:
        return self();
    }
    throw std::invalid_argument("face_dof_owner: bad group");
}

std::vector<PrimitiveID> sorted_ids(const DistributedDomain& dom) {
    std::vector<PrimitiveID> ids;
    for (int r = 0; r < dom.ranks(); ++r)
        for (const auto& [id, p] : dom.graph(r).local)
            ids.push_back(id);
    std::sort(ids.begin(), ids.end(),
              [](PrimitiveID a, PrimitiveID b) { return a.value < b.value; });
    return ids;
}

} // namespace

GlobalDoFMap::GlobalDoFMap(const DistributedDomain& domain, FunctionKind kind, int level,
                           TriangleLayout layout)
    : domain_(&domain), kind_(kind), level_(level), layout_(layout) {
    const auto ids = sorted_ids(domain);
    const int n = micro_edges_per_edge(level);

    for (const PrimitiveID id : ids) {
        const Primitive& p = domain.primitive(id);
        for_each_owned(kind, p.kind, p.info, level, layout, [&](std::size_t slot) {
            index_.emplace(std::make_pair(id.value, slot), owner_slot_.size());
            owner_slot_.emplace_back(id, slot);
        });
    }

    const auto map_slot = [&](PrimitiveID id, std::size_t slot, OwnerSlot owner) {
        const auto oit = index_.find({owner.id.value, owner.slot});
        if (oit == index_.end())
            throw std::logic_error("GlobalDoFMap: slot resolves to a non-owned location");
        const auto [it, inserted] = index_.emplace(std::make_pair(id.value, slot), oit->second);
        if (!inserted && it->second != oit->second)
            throw std::logic_error("GlobalDoFMap: slot mapped twice inconsistently");
    };

    for (const PrimitiveID id : ids) {
        const Primitive& p = domain.primitive(id);
        std::size_t visited = 0; // mapped or deliberately skipped
        switch (p.kind) {
        case PrimitiveKind::VERTEX: {
            const auto& v = p.vertex();
            if (kind != FunctionKind::DG0) {
                map_slot(id, 0, {id, 0});
                ++visited;
            }
            for (std::size_t ei = 0; ei < v.edges.size(); ++ei) {
                if (kind == FunctionKind::DG0)
                    break;
                const auto& e = domain.primitive(v.edges[ei]).edge();
                const int end = e.vertices[0] == id ? 0 : 1;
                const std::size_t base = vertex_edge_ghost_offset(kind, ei);
                map_slot(id, base, edge_line_owner(v.edges[ei], e, level, end == 0 ? 1 : n - 1));
                ++visited;
                if (kind == FunctionKind::P2) {
                    const int m = end == 0 ? 0 : n - 1;
                    map_slot(id, base + 1,
                             {v.edges[ei], edge_midline_offset(level) + static_cast<std::size_t>(m)});
                    ++visited;
                }
            }
            if (kind != FunctionKind::P1)
                for (std::size_t fi = 0; fi < v.faces.size(); ++fi) {
                    const auto& vf = v.faces[fi];
                    const auto& nf = domain.primitive(vf.id).face();
                    const TopoIndex t = kind == FunctionKind::P2
                                            ? corner_opposite(level, vf.corner_idx)
                                            : corner_cell(level, vf.corner_idx);
                    map_slot(id, vertex_face_ghost_offset(kind, v, fi),
                             face_dof_owner(vf.id, nf, kind, level, layout, t));
                    ++visited;
                }
            break;
        }
        case PrimitiveKind::EDGE: {
            const auto& e = p.edge();
            if (kind != FunctionKind::DG0) {
                for (int k = 0; k <= n; ++k) {
                    map_slot(id, static_cast<std::size_t>(k), edge_line_owner(id, e, level, k));
                    ++visited;
                }
                if (kind == FunctionKind::P2)
                    for (int m = 0; m < n; ++m) {
                        map_slot(id, edge_midline_offset(level) + static_cast<std::size_t>(m),
                                 {id, edge_midline_offset(level) + static_cast<std::size_t>(m)});
                        ++visited;
                    }
            }
            for (std::size_t fi = 0; fi < e.faces.size(); ++fi) {
                const auto& nb = e.faces[fi];
                const auto& nf = domain.primitive(nb.id).face();
                std::size_t off = edge_halo_offset(kind, level, e, fi);
                for (const HaloRow row : edge_halo_rows(kind, nb.slot)) {
                    const int len = border_row_length(row.group, level, row.offset);
                    for (int t = 0; t < len; ++t) {
                        const int w = nb.aligned ? t : len - 1 - t;
                        const TopoIndex ti = border_dof(row.group, level, nb.slot, row.offset, w);
                        map_slot(id, off, face_dof_owner(nb.id, nf, kind, level, layout, ti));
                        ++off;
                        ++visited;
                    }
                }
            }
            break;
        }
        case PrimitiveKind::FACE: {
            const auto& f = p.face();
            for (const DoFGroup g : field_groups(kind)) {
                const int w = group_base_width(g, level);
                for (int r = 0; r < w; ++r)
                    for (int c = 0; c + r < w; ++c) {
                        const std::size_t slot = face_group_offset(kind, level, g) +
                                                 linear_index(layout, level, {g, c, r});
                        map_slot(id, slot, face_dof_owner(id, f, kind, level, layout, {g, c, r}));
                        ++visited;
                    }
            }
            if (kind == FunctionKind::DG0)
                for (int s = 0; s < 3; ++s) {
                    const auto& e = domain.primitive(f.edges[static_cast<std::size_t>(s)]).edge();
                    const FaceNeighborInfo* other = nullptr;
                    for (const auto& nb : e.faces)
                        if (nb.id != id)
                            other = &nb;
                    for (int t = 0; t < n; ++t) {
                        ++visited;
                        if (other == nullptr)
                            continue; // domain border: the row mirrors nothing
                        const std::size_t slot = face_halo_offset(level, s) + static_cast<std::size_t>(t);
                        const int k = f.edge_aligned[static_cast<std::size_t>(s)] ? t : n - 1 - t;
                        const int w = other->aligned ? k : n - 1 - k;
                        const TopoIndex ti = border_dof(DoFGroup::FACE_UP, level, other->slot, 0, w);
                        const auto& nf = domain.primitive(other->id).face();
                        map_slot(id, slot, face_dof_owner(other->id, nf, kind, level, layout, ti));
                    }
                }
            break;
        }
        }
        if (visited != field_size(kind, p.kind, p.info, level))
            throw std::logic_error("GlobalDoFMap: storage enumeration missed slots on primitive " +
                                   std::to_string(id.value));
    }
}

std::size_t GlobalDoFMap::global_index(PrimitiveID id, std::size_t slot) const {
    const auto it = index_.find({id.value, slot});
    if (it == index_.end())
        throw std::out_of_range("GlobalDoFMap: no DoF mirrored at primitive " +
                                std::to_string(id.value) + " slot " + std::to_string(slot));
    return it->second;
}

std::pair<PrimitiveID, std::size_t> GlobalDoFMap::location(std::size_t g) const {
    if (g >= owner_slot_.size())
        throw std::out_of_range("GlobalDoFMap: global index " + std::to_string(g) + " out of range");
    return owner_slot_[g];
}

void GlobalDoFMap::check_function(const ScalarFunction& f) const {
    if (&f.domain() != domain_)
        throw std::invalid_argument("GlobalDoFMap: function lives on a different domain");
    if (f.kind() != kind_)
        throw std::invalid_argument("GlobalDoFMap: function kind mismatch");
    if (f.layout().scheme() != layout_.scheme())
        throw std::invalid_argument("GlobalDoFMap: layout scheme mismatch");
    if (level_ < f.min_level() || level_ > f.max_level())
        throw std::out_of_range("GlobalDoFMap: level " + std::to_string(level_) +
                                " outside the function's range");
}

std::vector<double> GlobalDoFMap::gather(const ScalarFunction& f) const {
    check_function(f);
    std::vector<double> flat(size());
    for (std::size_t g = 0; g < owner_slot_.size(); ++g)
        flat[g] = f.values(owner_slot_[g].first, level_).at(owner_slot_[g].second);
    return flat;
}

void GlobalDoFMap::scatter(const std::vector<double>& flat, ScalarFunction& f) const {
    check_function(f);
    if (flat.size() != size())
        throw std::invalid_argument("GlobalDoFMap::scatter: vector has " +
                                    std::to_string(flat.size()) + " entries, expected " +
                                    std::to_string(size()));
    for (std::size_t g = 0; g < owner_slot_.size(); ++g)
        f.values(owner_slot_[g].first, level_).at(owner_slot_[g].second) = flat[g];
}

std::vector<std::uint8_t> GlobalDoFMap::gather_flags(const ScalarFunction& f) const {
    check_function(f);
    std::vector<std::uint8_t> flat(size());
    for (std::size_t g = 0; g < owner_slot_.size(); ++g)
        flat[g] = f.flags(owner_slot_[g].first, level_).at(owner_slot_[g].second);
    return flat;
}

} // namespace hytegrid
