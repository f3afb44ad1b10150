#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hytegrid/indexing.hpp"
#include "hytegrid/mesh.hpp"

namespace hytegrid {

// ---------------------------------------------------------------------------
// Per-primitive field storage layout.
//
// FACE   P1:  [VERTEX block]                       (full closed triangle; the
//        P2:  [VERTEX | EH | ED | EV blocks]        border rows are read-only
//                                                   copies owned by edges /
//                                                   vertices)
//        DG0: [FACE_UP | FACE_DOWN | 3 neighbor-cell rows, one per slot]
//             (the per-slot row holds the adjacent face's border up-cells in
//              this face's walk order; empty-by-convention at domain borders)
//
// EDGE   P1:  [line n+1 | per neighboring face: halo block]
//        P2:  [line n+1 | midline n | per face: halo block]
//        DG0: [per face: halo block]
//        The line runs from the lower-ID endpoint (index 0) to the higher-ID
//        endpoint (index n); both ends are copies of the vertex values. The
//        halo block per face concatenates lattice rows of that face, stored
//        in the edge's own direction (see edge_halo_rows).
//
// VERTEX P1:  [own | per incident edge: line neighbor]
//        P2:  [own | per edge: (line neighbor, first midpoint) | per incident
//              face: midpoint of the corner element's opposite micro-edge]
//        DG0: [per incident face: corner up-cell]
// ---------------------------------------------------------------------------

/// DoF groups a function kind stores on a macro-face, in block order.
std::span<const DoFGroup> field_groups(FunctionKind kind);

/// One lattice row of a face, identified by group and distance from a border.
struct HaloRow {
    DoFGroup group = DoFGroup::VERTEX;
    int offset = 0;
};

/// Rows a face sends to the edge at `slot`, in message/storage order: first
/// the rows lying on the border itself (mirrors of edge-owned data), then the
/// adjacent inner rows the edge needs. Identical on both sides by contract.
std::vector<HaloRow> edge_halo_rows(FunctionKind kind, int slot);

/// Edge-type group whose midpoints lie on the border line of `slot`
/// (EH on the bottom, EV on the left, ED on the diagonal).
DoFGroup parallel_group(int slot);

// --- face storage ---------------------------------------------------------
std::size_t face_group_offset(FunctionKind kind, int level, DoFGroup g);
std::size_t face_field_size(FunctionKind kind, int level);
/// DG0 only: start of the neighbor-cell row for `slot` (row length n).
std::size_t face_halo_offset(int level, int slot);

// --- edge storage ----------------------------------------------------------
std::size_t edge_line_size(FunctionKind kind, int level);
/// P2 only: start of the on-edge midpoint line (length n).
std::size_t edge_midline_offset(int level);
std::size_t edge_halo_block_size(FunctionKind kind, int level, int slot);
/// Start of the halo block for `e.faces[face_idx]`.
std::size_t edge_halo_offset(FunctionKind kind, int level, const EdgeInfo& e, std::size_t face_idx);
/// Offset of a halo row inside its block; the row is addressed by (group,
/// offset) as listed in edge_halo_rows.
std::size_t edge_halo_row_offset(FunctionKind kind, int level, int slot, DoFGroup g, int row_offset);
std::size_t edge_field_size(FunctionKind kind, int level, const EdgeInfo& e);

// --- vertex storage ---------------------------------------------------------
std::size_t vertex_field_size(FunctionKind kind, const VertexInfo& v);
std::size_t vertex_edge_ghost_offset(FunctionKind kind, std::size_t edge_idx);
std::size_t vertex_face_ghost_offset(FunctionKind kind, const VertexInfo& v, std::size_t face_idx);

/// Total storage for one primitive at one level.
std::size_t field_size(FunctionKind kind, const SetupPrimitive& p, int level);
std::size_t field_size(FunctionKind kind, PrimitiveKind pk,
                       const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, int level);

// --- ownership ---------------------------------------------------------------
/// Calls fn(slot) for every storage slot whose DoF the primitive owns, in a
/// fixed lattice order (independent of the layout scheme).
void for_each_owned(FunctionKind kind, PrimitiveKind pk,
                    const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, int level,
                    const TriangleLayout& layout, const std::function<void(std::size_t)>& fn);

/// Face-owned DoFs with their lattice position: fn(group, col, row, slot) in
/// the same traversal order for_each_owned uses on faces.
void for_each_face_owned(FunctionKind kind, int level, const TriangleLayout& layout,
                         const std::function<void(DoFGroup, int, int, std::size_t)>& fn);

/// Same, with the DoF's physical coordinates.
void for_each_owned_coord(FunctionKind kind, PrimitiveKind pk,
                          const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, int level,
                          const TriangleLayout& layout,
                          const std::function<void(std::size_t, double, double)>& fn);

} // namespace hytegrid
