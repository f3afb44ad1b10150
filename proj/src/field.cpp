#include "hytegrid/field.hpp"

#include <stdexcept>
#include <string>

namespace hytegrid {

namespace {

/// Flag of a DoF addressed in a face's frame, from that face's markers. The
/// only DoFs not INNER are those on a border line: lattice vertices on any of
/// the three lines (corners take the corner marker), and the edge-type group
/// whose midpoints lie on a line (EH on the bottom, EV on the left, ED on the
/// diagonal). Cells are never on a line.
DoFFlag face_frame_flag(const BoundaryConditions& bc, int level, DoFGroup g, int c, int r,
                        const std::array<int, 3>& edge_markers,
                        const std::array<int, 3>& vertex_markers) {
    const int n = micro_edges_per_edge(level);
    switch (g) {
    case DoFGroup::VERTEX:
        if (c == 0 && r == 0)
            return bc.flag_for(vertex_markers[0]);
        if (c == n && r == 0)
            return bc.flag_for(vertex_markers[1]);
        if (c == 0 && r == n)
            return bc.flag_for(vertex_markers[2]);
        if (r == 0)
            return bc.flag_for(edge_markers[0]);
        if (c == 0)
            return bc.flag_for(edge_markers[1]);
        if (c + r == n)
            return bc.flag_for(edge_markers[2]);
        return DoFFlag::INNER;
    case DoFGroup::EDGE_HORIZONTAL:
        return r == 0 ? bc.flag_for(edge_markers[0]) : DoFFlag::INNER;
    case DoFGroup::EDGE_VERTICAL:
        return c == 0 ? bc.flag_for(edge_markers[1]) : DoFFlag::INNER;
    case DoFGroup::EDGE_DIAGONAL:
        return c + r == n - 1 ? bc.flag_for(edge_markers[2]) : DoFFlag::INNER;
    case DoFGroup::FACE_UP:
    case DoFGroup::FACE_DOWN:
        return DoFFlag::INNER;
    }
    throw std::invalid_argument("face_frame_flag: bad group");
}

void fill_face_flags(std::vector<std::uint8_t>& out, FunctionKind kind, const FaceInfo& f,
                     int level, const BoundaryConditions& bc, const TriangleLayout& layout) {
    for (DoFGroup g : field_groups(kind)) {
        const std::size_t off = face_group_offset(kind, level, g);
        const int w = group_base_width(g, level);
        for (int r = 0; r < w; ++r)
            for (int c = 0; c + r < w; ++c)
                out[off + linear_index(layout, level, TopoIndex{g, c, r})] = flag_bit(
                    face_frame_flag(bc, level, g, c, r, f.edge_markers, f.vertex_markers));
    }
    // DG0 neighbor-cell rows stay INNER (initialized by the caller).
}

void fill_edge_flags(std::vector<std::uint8_t>& out, FunctionKind kind, const EdgeInfo& e,
                     int level, const BoundaryConditions& bc) {
    if (kind == FunctionKind::DG0)
        return; // no line, halo cells are INNER
    const int n = micro_edges_per_edge(level);
    const std::uint8_t em = flag_bit(bc.flag_for(e.marker));
    out[0] = flag_bit(bc.flag_for(e.vertex_markers[0]));
    out[static_cast<std::size_t>(n)] = flag_bit(bc.flag_for(e.vertex_markers[1]));
    for (int i = 1; i < n; ++i)
        out[static_cast<std::size_t>(i)] = em;
    if (kind == FunctionKind::P2)
        for (int i = 0; i < n; ++i)
            out[edge_midline_offset(level) + static_cast<std::size_t>(i)] = em;
    for (std::size_t fi = 0; fi < e.faces.size(); ++fi) {
        const auto& nb = e.faces[fi];
        std::size_t pos = edge_halo_offset(kind, level, e, fi);
        for (const HaloRow& row : edge_halo_rows(kind, nb.slot)) {
            const int len = border_row_length(row.group, level, row.offset);
            for (int k = 0; k < len; ++k) {
                const int walk = nb.aligned ? k : len - 1 - k;
                const TopoIndex t = border_dof(row.group, level, nb.slot, row.offset, walk);
                out[pos++] = flag_bit(face_frame_flag(bc, level, row.group, t.col, t.row,
                                                      nb.edge_markers, nb.vertex_markers));
            }
        }
    }
}

/// Lattice position of the midpoint DoF opposite a face corner in the corner
/// micro-element (ED at corner 0, EV at corner 1, EH at corner 2).
TopoIndex corner_opposite_midpoint(int level, int corner_idx) {
    const int n = micro_edges_per_edge(level);
    switch (corner_idx) {
    case 0: return TopoIndex{DoFGroup::EDGE_DIAGONAL, 0, 0};
    case 1: return TopoIndex{DoFGroup::EDGE_VERTICAL, n - 1, 0};
    case 2: return TopoIndex{DoFGroup::EDGE_HORIZONTAL, 0, n - 1};
    default: throw std::out_of_range("corner_opposite_midpoint: corner " + std::to_string(corner_idx));
    }
}

void fill_vertex_flags(std::vector<std::uint8_t>& out, FunctionKind kind, const VertexInfo& v,
                       int level, const BoundaryConditions& bc) {
    if (kind == FunctionKind::DG0)
        return; // corner-cell ghosts are INNER
    const int n = micro_edges_per_edge(level);
    out[0] = flag_bit(bc.flag_for(v.marker));
    for (std::size_t i = 0; i < v.edges.size(); ++i) {
        // The line neighbor is the edge's first interior DoF, except on the
        // coarsest level where it is the far endpoint itself.
        const int line_marker = n > 1 ? v.edge_markers[i] : v.edge_far_markers[i];
        out[vertex_edge_ghost_offset(kind, i)] = flag_bit(bc.flag_for(line_marker));
        if (kind == FunctionKind::P2)
            out[vertex_edge_ghost_offset(kind, i) + 1] = flag_bit(bc.flag_for(v.edge_markers[i]));
    }
    if (kind == FunctionKind::P2)
        for (std::size_t fi = 0; fi < v.faces.size(); ++fi) {
            const TopoIndex t = corner_opposite_midpoint(level, v.faces[fi].corner_idx);
            out[vertex_face_ghost_offset(kind, v, fi)] = flag_bit(face_frame_flag(
                bc, level, t.group, t.col, t.row, v.faces[fi].edge_markers, {}));
        }
}

} // namespace

std::vector<std::uint8_t> compute_flags(FunctionKind kind, PrimitiveKind pk,
                                        const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info,
                                        int level, const BoundaryConditions& bc,
                                        const TriangleLayout& layout) {
    std::vector<std::uint8_t> out(field_size(kind, pk, info, level), flag_bit(DoFFlag::INNER));
    switch (pk) {
    case PrimitiveKind::VERTEX:
        fill_vertex_flags(out, kind, std::get<VertexInfo>(info), level, bc);
        break;
    case PrimitiveKind::EDGE:
        fill_edge_flags(out, kind, std::get<EdgeInfo>(info), level, bc);
        break;
    case PrimitiveKind::FACE:
        fill_face_flags(out, kind, std::get<FaceInfo>(info), level, bc, layout);
        break;
    }
    return out;
}

DistributedDomain::DataCallbacks field_callbacks(FunctionKind kind, int min_level, int max_level,
                                                 BoundaryConditions bc, TriangleLayout layout) {
    if (min_level < 0 || max_level < min_level)
        throw std::invalid_argument("field_callbacks: bad level range [" + std::to_string(min_level) +
                                    ", " + std::to_string(max_level) + "]");
    DistributedDomain::DataCallbacks cb;
    cb.init = [=](const Primitive& p) {
        FieldData d;
        for (int l = min_level; l <= max_level; ++l) {
            d.values[l].assign(field_size(kind, p.kind, p.info, l), 0.0);
            d.flags[l] = compute_flags(kind, p.kind, p.info, l, bc, layout);
        }
        return d;
    };
    cb.serialize = [](const std::any& a, MessageBuffer& b) {
        const auto& d = std::any_cast<const FieldData&>(a);
        b.put_u64(d.values.size());
        for (const auto& [level, vals] : d.values) {
            b.put_i64(level);
            b.put_f64_span(vals);
            b.put_u8_span(d.flags.at(level));
        }
    };
    cb.deserialize = [](MessageBuffer& b) {
        FieldData d;
        const std::uint64_t nlevels = b.get_u64();
        for (std::uint64_t i = 0; i < nlevels; ++i) {
            const int level = static_cast<int>(b.get_i64());
            d.values[level] = b.get_f64_vector();
            d.flags[level] = b.get_u8_vector();
        }
        return d;
    };
    return cb;
}

std::vector<double>& field_values(Primitive& p, DataHandle h, int level) {
    auto& d = data_as<FieldData>(p, h);
    const auto it = d.values.find(level);
    if (it == d.values.end())
        throw std::out_of_range("field_values: level " + std::to_string(level) +
                                " not allocated on primitive " + std::to_string(p.id.value));
    return it->second;
}

const std::vector<double>& field_values(const Primitive& p, DataHandle h, int level) {
    return field_values(const_cast<Primitive&>(p), h, level);
}

std::vector<std::uint8_t>& field_flags(Primitive& p, DataHandle h, int level) {
    auto& d = data_as<FieldData>(p, h);
    const auto it = d.flags.find(level);
    if (it == d.flags.end())
        throw std::out_of_range("field_flags: level " + std::to_string(level) +
                                " not allocated on primitive " + std::to_string(p.id.value));
    return it->second;
}

const std::vector<std::uint8_t>& field_flags(const Primitive& p, DataHandle h, int level) {
    return field_flags(const_cast<Primitive&>(p), h, level);
}

} // namespace hytegrid
