#pragma once

// Test oracle: canonical global names for field DoFs. Every storage slot of
// every primitive — own values and ghost copies alike — is mapped to the key
// of the DoF it represents, using only the documented conventions (slot
// walks, alignment, halo row order). After a full ghost sync, all slots
// sharing a key must hold bit-identical values; flags must agree always.
//
// Keys:
//   V:<id>        macro-vertex value
//   E:<id>:<k>    edge line interior, k = 1..n-1 along the edge's intrinsic
//                 direction (low-ID -> high-ID endpoint)
//   M:<id>:<k>    edge midline (P2), k = 0..n-1 along the intrinsic direction
//   F:<id>:<g>:<c>:<r>  face-owned DoF of group g at lattice (c, r)

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hytegrid/field.hpp"
#include "hytegrid/layout.hpp"
#include "hytegrid/primitives.hpp"

namespace oracle {

using namespace hytegrid;

inline std::string vkey(PrimitiveID v) { return "V:" + std::to_string(v.value); }
inline std::string ekey(PrimitiveID e, int k) {
    return "E:" + std::to_string(e.value) + ":" + std::to_string(k);
}
inline std::string mkey(PrimitiveID e, int k) {
    return "M:" + std::to_string(e.value) + ":" + std::to_string(k);
}
inline std::string fkey(PrimitiveID f, DoFGroup g, int c, int r) {
    return "F:" + std::to_string(f.value) + ":" + to_string(g) + ":" + std::to_string(c) + ":" +
           std::to_string(r);
}

/// Key of line slot i (0..n) on an edge; the ends are the macro-vertices.
inline std::string edge_line_key(const EdgeInfo& e, PrimitiveID eid, int level, int i) {
    const int n = micro_edges_per_edge(level);
    if (i == 0)
        return vkey(e.vertices[0]);
    if (i == n)
        return vkey(e.vertices[1]);
    return ekey(eid, i);
}

/// Canonical key of the face-lattice DoF (g, c, r): corners belong to
/// macro-vertices, border rows to macro-edges (walk index translated to the
/// edge-intrinsic index via `aligned`), everything else to the face itself.
inline std::string face_dof_key(const FaceInfo& F, PrimitiveID fid, int level, DoFGroup g, int c,
                                int r) {
    const int n = micro_edges_per_edge(level);
    const auto line = [&](int slot, int w) {
        const int k = F.edge_aligned[static_cast<std::size_t>(slot)] ? w : n - w;
        return ekey(F.edges[static_cast<std::size_t>(slot)], k);
    };
    const auto mid = [&](int slot, int w) {
        const int k = F.edge_aligned[static_cast<std::size_t>(slot)] ? w : n - 1 - w;
        return mkey(F.edges[static_cast<std::size_t>(slot)], k);
    };
    switch (g) {
    case DoFGroup::VERTEX:
        if (c == 0 && r == 0)
            return vkey(F.vertices[0]);
        if (c == n && r == 0)
            return vkey(F.vertices[1]);
        if (c == 0 && r == n)
            return vkey(F.vertices[2]);
        if (r == 0)
            return line(0, c);
        if (c == 0)
            return line(1, r);
        if (c + r == n)
            return line(2, r);
        return fkey(fid, g, c, r);
    case DoFGroup::EDGE_HORIZONTAL:
        return r == 0 ? mid(0, c) : fkey(fid, g, c, r);
    case DoFGroup::EDGE_VERTICAL:
        return c == 0 ? mid(1, r) : fkey(fid, g, c, r);
    case DoFGroup::EDGE_DIAGONAL:
        return c + r == n - 1 ? mid(2, r) : fkey(fid, g, c, r);
    case DoFGroup::FACE_UP:
    case DoFGroup::FACE_DOWN:
        return fkey(fid, g, c, r);
    }
    throw std::logic_error("face_dof_key: bad group");
}

/// Key per storage slot of one primitive ("" = intentionally unkeyed: a cell
/// halo row along the domain border stays unused). Looks primitives up
/// domain-wide, so this is a test-only, process-global view.
inline std::vector<std::string> slot_keys(const DistributedDomain& dom, const Primitive& p,
                                          FunctionKind kind, int level,
                                          const TriangleLayout& layout = row_major_layout()) {
    const int n = micro_edges_per_edge(level);
    std::vector<std::string> keys(field_size(kind, p.kind, p.info, level));
    const auto set = [&](std::size_t slot, std::string key) {
        if (!keys.at(slot).empty())
            throw std::logic_error("slot_keys: slot keyed twice");
        keys.at(slot) = std::move(key);
    };

    switch (p.kind) {
    case PrimitiveKind::FACE: {
        const FaceInfo& F = p.face();
        for (const DoFGroup g : field_groups(kind)) {
            const int w = group_base_width(g, level);
            for (int r = 0; r < w; ++r)
                for (int c = 0; c + r < w; ++c)
                    set(face_group_offset(kind, level, g) + linear_index(layout, level, {g, c, r}),
                        face_dof_key(F, p.id, level, g, c, r));
        }
        if (kind == FunctionKind::DG0)
            for (int slot = 0; slot < 3; ++slot) {
                const EdgeInfo& E = dom.primitive(F.edges[static_cast<std::size_t>(slot)]).edge();
                if (E.faces.size() < 2)
                    continue;
                const FaceNeighborInfo& other =
                    E.faces[E.faces[0].id == p.id ? 1 : 0]; // the face across the edge
                const bool a = F.edge_aligned[static_cast<std::size_t>(slot)];
                for (int j = 0; j < n; ++j) {
                    const int ke = a ? j : n - 1 - j;
                    const int ko = other.aligned ? ke : n - 1 - ke;
                    const TopoIndex t = border_dof(DoFGroup::FACE_UP, level, other.slot, 0, ko);
                    set(face_halo_offset(level, slot) + static_cast<std::size_t>(j),
                        fkey(other.id, DoFGroup::FACE_UP, t.col, t.row));
                }
            }
        return keys;
    }
    case PrimitiveKind::EDGE: {
        const EdgeInfo& E = p.edge();
        if (kind != FunctionKind::DG0)
            for (int i = 0; i <= n; ++i)
                set(static_cast<std::size_t>(i), edge_line_key(E, p.id, level, i));
        if (kind == FunctionKind::P2)
            for (int m = 0; m < n; ++m)
                set(edge_midline_offset(level) + static_cast<std::size_t>(m), mkey(p.id, m));
        for (std::size_t fi = 0; fi < E.faces.size(); ++fi) {
            const FaceNeighborInfo& nb = E.faces[fi];
            const FaceInfo& F = dom.primitive(nb.id).face();
            std::size_t off = edge_halo_offset(kind, level, E, fi);
            for (const HaloRow& row : edge_halo_rows(kind, nb.slot)) {
                const int len = border_row_length(row.group, level, row.offset);
                for (int ke = 0; ke < len; ++ke) {
                    const int k = nb.aligned ? ke : len - 1 - ke;
                    const TopoIndex t = border_dof(row.group, level, nb.slot, row.offset, k);
                    set(off + static_cast<std::size_t>(ke),
                        face_dof_key(F, nb.id, level, t.group, t.col, t.row));
                }
                off += static_cast<std::size_t>(len);
            }
        }
        return keys;
    }
    case PrimitiveKind::VERTEX: {
        const VertexInfo& V = p.vertex();
        if (kind != FunctionKind::DG0) {
            set(0, vkey(p.id));
            for (std::size_t ei = 0; ei < V.edges.size(); ++ei) {
                const PrimitiveID eid = V.edges[ei];
                const EdgeInfo& E = dom.primitive(eid).edge();
                const int end = E.vertices[0] == p.id ? 0 : 1;
                set(vertex_edge_ghost_offset(kind, ei),
                    edge_line_key(E, eid, level, end == 0 ? 1 : n - 1));
                if (kind == FunctionKind::P2)
                    set(vertex_edge_ghost_offset(kind, ei) + 1, mkey(eid, end == 0 ? 0 : n - 1));
            }
        }
        if (kind != FunctionKind::P1)
            for (std::size_t fi = 0; fi < V.faces.size(); ++fi) {
                const VertexFaceInfo& vf = V.faces[fi];
                const FaceInfo& F = dom.primitive(vf.id).face();
                // The DoF across the corner: opposite micro-edge midpoint
                // (P2) or the corner micro-cell (DG0).
                TopoIndex t;
                if (kind == FunctionKind::P2)
                    t = vf.corner_idx == 0   ? TopoIndex{DoFGroup::EDGE_DIAGONAL, 0, 0}
                        : vf.corner_idx == 1 ? TopoIndex{DoFGroup::EDGE_VERTICAL, n - 1, 0}
                                             : TopoIndex{DoFGroup::EDGE_HORIZONTAL, 0, n - 1};
                else
                    t = vf.corner_idx == 0   ? TopoIndex{DoFGroup::FACE_UP, 0, 0}
                        : vf.corner_idx == 1 ? TopoIndex{DoFGroup::FACE_UP, n - 1, 0}
                                             : TopoIndex{DoFGroup::FACE_UP, 0, n - 1};
                set(vertex_face_ghost_offset(kind, V, fi),
                    face_dof_key(F, vf.id, level, t.group, t.col, t.row));
            }
        return keys;
    }
    }
    throw std::logic_error("slot_keys: bad primitive kind");
}

struct SlotRef {
    PrimitiveID prim;
    std::size_t slot = 0;
};

/// key -> every storage slot holding that DoF, over the whole domain.
inline std::map<std::string, std::vector<SlotRef>> build_key_map(const DistributedDomain& dom,
                                                                 FunctionKind kind, int level,
                                                                 const TriangleLayout& layout =
                                                                     row_major_layout()) {
    std::map<std::string, std::vector<SlotRef>> m;
    for (int r = 0; r < dom.ranks(); ++r)
        for (const auto& [id, p] : dom.graph(r).local) {
            const auto keys = slot_keys(dom, p, kind, level, layout);
            for (std::size_t s = 0; s < keys.size(); ++s)
                if (!keys[s].empty())
                    m[keys[s]].push_back({id, s});
        }
    return m;
}

} // namespace oracle
