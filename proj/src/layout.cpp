#include "hytegrid/layout.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace hytegrid {

namespace {

const std::array<DoFGroup, 1> kP1Groups{DoFGroup::VERTEX};
const std::array<DoFGroup, 4> kP2Groups{DoFGroup::VERTEX, DoFGroup::EDGE_HORIZONTAL,
                                        DoFGroup::EDGE_DIAGONAL, DoFGroup::EDGE_VERTICAL};
const std::array<DoFGroup, 2> kDg0Groups{DoFGroup::FACE_UP, DoFGroup::FACE_DOWN};

} // namespace

DoFGroup parallel_group(int slot) {
    switch (slot) {
    case 0: return DoFGroup::EDGE_HORIZONTAL;
    case 1: return DoFGroup::EDGE_VERTICAL;
    case 2: return DoFGroup::EDGE_DIAGONAL;
    default: throw std::out_of_range("parallel_group: slot " + std::to_string(slot));
    }
}

std::span<const DoFGroup> field_groups(FunctionKind kind) {
    switch (kind) {
    case FunctionKind::P1: return kP1Groups;
    case FunctionKind::P2: return kP2Groups;
    case FunctionKind::DG0: return kDg0Groups;
    }
    throw std::invalid_argument("field_groups: bad kind");
}

std::vector<HaloRow> edge_halo_rows(FunctionKind kind, int slot) {
    switch (kind) {
    case FunctionKind::P1:
        return {{DoFGroup::VERTEX, 0}, {DoFGroup::VERTEX, 1}};
    case FunctionKind::P2: {
        const DoFGroup par = parallel_group(slot);
        std::vector<HaloRow> rows{{DoFGroup::VERTEX, 0}, {par, 0}, {DoFGroup::VERTEX, 1}, {par, 1}};
        for (DoFGroup g :
             {DoFGroup::EDGE_HORIZONTAL, DoFGroup::EDGE_DIAGONAL, DoFGroup::EDGE_VERTICAL})
            if (g != par)
                rows.push_back({g, 0});
        return rows;
    }
    case FunctionKind::DG0:
        return {{DoFGroup::FACE_UP, 0}, {DoFGroup::FACE_DOWN, 0}};
    }
    throw std::invalid_argument("edge_halo_rows: bad kind");
}

std::size_t face_group_offset(FunctionKind kind, int level, DoFGroup g) {
    std::size_t off = 0;
    for (DoFGroup have : field_groups(kind)) {
        if (have == g)
            return off;
        off += group_count(level, have);
    }
    throw std::invalid_argument("face_group_offset: group " + std::string(to_string(g)) +
                                " not stored for kind " + to_string(kind));
}

std::size_t face_field_size(FunctionKind kind, int level) {
    std::size_t size = 0;
    for (DoFGroup g : field_groups(kind))
        size += group_count(level, g);
    if (kind == FunctionKind::DG0)
        size += 3 * static_cast<std::size_t>(micro_edges_per_edge(level));
    return size;
}

std::size_t face_halo_offset(int level, int slot) {
    if (slot < 0 || slot > 2)
        throw std::out_of_range("face_halo_offset: slot " + std::to_string(slot));
    const auto n = static_cast<std::size_t>(micro_edges_per_edge(level));
    return group_count(level, DoFGroup::FACE_UP) + group_count(level, DoFGroup::FACE_DOWN) +
           static_cast<std::size_t>(slot) * n;
}

std::size_t edge_line_size(FunctionKind kind, int level) {
    const auto n = static_cast<std::size_t>(micro_edges_per_edge(level));
    switch (kind) {
    case FunctionKind::P1: return n + 1;
    case FunctionKind::P2: return 2 * n + 1;
    case FunctionKind::DG0: return 0;
    }
    throw std::invalid_argument("edge_line_size: bad kind");
}

std::size_t edge_midline_offset(int level) {
    return static_cast<std::size_t>(micro_edges_per_edge(level)) + 1;
}

std::size_t edge_halo_block_size(FunctionKind kind, int level, int slot) {
    std::size_t size = 0;
    for (const HaloRow& row : edge_halo_rows(kind, slot))
        size += static_cast<std::size_t>(border_row_length(row.group, level, row.offset));
    return size;
}

std::size_t edge_halo_offset(FunctionKind kind, int level, const EdgeInfo& e, std::size_t face_idx) {
    if (face_idx >= e.faces.size())
        throw std::out_of_range("edge_halo_offset: face index " + std::to_string(face_idx));
    std::size_t off = edge_line_size(kind, level);
    for (std::size_t j = 0; j < face_idx; ++j)
        off += edge_halo_block_size(kind, level, e.faces[j].slot);
    return off;
}

std::size_t edge_halo_row_offset(FunctionKind kind, int level, int slot, DoFGroup g, int row_offset) {
    std::size_t off = 0;
    for (const HaloRow& row : edge_halo_rows(kind, slot)) {
        if (row.group == g && row.offset == row_offset)
            return off;
        off += static_cast<std::size_t>(border_row_length(row.group, level, row.offset));
    }
    throw std::invalid_argument("edge_halo_row_offset: no row (" + std::string(to_string(g)) + ", " +
                                std::to_string(row_offset) + ") for kind " + to_string(kind));
}

std::size_t edge_field_size(FunctionKind kind, int level, const EdgeInfo& e) {
    std::size_t size = edge_line_size(kind, level);
    for (const auto& f : e.faces)
        size += edge_halo_block_size(kind, level, f.slot);
    return size;
}

std::size_t vertex_field_size(FunctionKind kind, const VertexInfo& v) {
    switch (kind) {
    case FunctionKind::P1: return 1 + v.edges.size();
    case FunctionKind::P2: return 1 + 2 * v.edges.size() + v.faces.size();
    case FunctionKind::DG0: return v.faces.size();
    }
    throw std::invalid_argument("vertex_field_size: bad kind");
}

std::size_t vertex_edge_ghost_offset(FunctionKind kind, std::size_t edge_idx) {
    switch (kind) {
    case FunctionKind::P1: return 1 + edge_idx;
    case FunctionKind::P2: return 1 + 2 * edge_idx;
    case FunctionKind::DG0:
        throw std::invalid_argument("vertex_edge_ghost_offset: cell fields have no edge ghosts");
    }
    throw std::invalid_argument("vertex_edge_ghost_offset: bad kind");
}

std::size_t vertex_face_ghost_offset(FunctionKind kind, const VertexInfo& v, std::size_t face_idx) {
    if (face_idx >= v.faces.size())
        throw std::out_of_range("vertex_face_ghost_offset: face index " + std::to_string(face_idx));
    switch (kind) {
    case FunctionKind::P1:
        throw std::invalid_argument("vertex_face_ghost_offset: P1 stores no face ghosts");
    case FunctionKind::P2: return 1 + 2 * v.edges.size() + face_idx;
    case FunctionKind::DG0: return face_idx;
    }
    throw std::invalid_argument("vertex_face_ghost_offset: bad kind");
}

std::size_t field_size(FunctionKind kind, PrimitiveKind pk,
                       const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, int level) {
    switch (pk) {
    case PrimitiveKind::VERTEX: return vertex_field_size(kind, std::get<VertexInfo>(info));
    case PrimitiveKind::EDGE: return edge_field_size(kind, level, std::get<EdgeInfo>(info));
    case PrimitiveKind::FACE: return face_field_size(kind, level);
    }
    throw std::invalid_argument("field_size: bad primitive kind");
}

std::size_t field_size(FunctionKind kind, const SetupPrimitive& p, int level) {
    return field_size(kind, p.kind, p.info, level);
}

void for_each_face_owned(FunctionKind kind, int level, const TriangleLayout& layout,
                         const std::function<void(DoFGroup, int, int, std::size_t)>& fn) {
    const int n = micro_edges_per_edge(level);
    const auto emit = [&](DoFGroup g, int c, int r) {
        const std::size_t idx =
            face_group_offset(kind, level, g) + linear_index(layout, level, TopoIndex{g, c, r});
        fn(g, c, r, idx);
    };
    switch (kind) {
    case FunctionKind::P2:
        for (int r = 0; r + 1 <= n - 1; ++r) // EH: everything off the bottom line
            for (int c = 0; c + r + 1 <= n - 1; ++c)
                emit(DoFGroup::EDGE_HORIZONTAL, c, r + 1);
        for (int r = 0; r <= n - 2; ++r) // ED: everything off the diagonal line
            for (int c = 0; c + r <= n - 2; ++c)
                emit(DoFGroup::EDGE_DIAGONAL, c, r);
        for (int r = 0; r <= n - 2; ++r) // EV: everything off the left line
            for (int c = 1; c + r <= n - 1; ++c)
                emit(DoFGroup::EDGE_VERTICAL, c, r);
        [[fallthrough]];
    case FunctionKind::P1:
        for (int r = 1; r <= n - 2; ++r) // interior lattice vertices
            for (int c = 1; c + r <= n - 1; ++c)
                emit(DoFGroup::VERTEX, c, r);
        return;
    case FunctionKind::DG0:
        for (int r = 0; r <= n - 1; ++r)
            for (int c = 0; c + r <= n - 1; ++c)
                emit(DoFGroup::FACE_UP, c, r);
        for (int r = 0; r <= n - 2; ++r)
            for (int c = 0; c + r <= n - 2; ++c)
                emit(DoFGroup::FACE_DOWN, c, r);
        return;
    }
    throw std::invalid_argument("for_each_face_owned: bad kind");
}

void for_each_owned(FunctionKind kind, PrimitiveKind pk,
                    const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, int level,
                    const TriangleLayout& layout, const std::function<void(std::size_t)>& fn) {
    (void)info; // ownership is positional; the topology enters via sizes only
    const int n = micro_edges_per_edge(level);
    switch (pk) {
    case PrimitiveKind::VERTEX:
        if (kind != FunctionKind::DG0)
            fn(0);
        return;
    case PrimitiveKind::EDGE:
        if (kind == FunctionKind::DG0)
            return;
        for (int i = 1; i <= n - 1; ++i)
            fn(static_cast<std::size_t>(i));
        if (kind == FunctionKind::P2)
            for (int i = 0; i < n; ++i)
                fn(edge_midline_offset(level) + static_cast<std::size_t>(i));
        return;
    case PrimitiveKind::FACE:
        for_each_face_owned(kind, level, layout, [&](DoFGroup, int, int, std::size_t idx) { fn(idx); });
        return;
    }
    throw std::invalid_argument("for_each_owned: bad primitive kind");
}

void for_each_owned_coord(FunctionKind kind, PrimitiveKind pk,
                          const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info, int level,
                          const TriangleLayout& layout,
                          const std::function<void(std::size_t, double, double)>& fn) {
    const int n = micro_edges_per_edge(level);
    switch (pk) {
    case PrimitiveKind::VERTEX: {
        if (kind == FunctionKind::DG0)
            return;
        const auto& v = std::get<VertexInfo>(info);
        fn(0, v.coord.x, v.coord.y);
        return;
    }
    case PrimitiveKind::EDGE: {
        if (kind == FunctionKind::DG0)
            return;
        const auto& e = std::get<EdgeInfo>(info);
        const Vec2 a = e.coords[0], b = e.coords[1];
        const auto at = [&](double t) { return a + t * (b - a); };
        for (int i = 1; i <= n - 1; ++i) {
            const Vec2 p = at(static_cast<double>(i) / n);
            fn(static_cast<std::size_t>(i), p.x, p.y);
        }
        if (kind == FunctionKind::P2)
            for (int i = 0; i < n; ++i) {
                const Vec2 p = at((i + 0.5) / n);
                fn(edge_midline_offset(level) + static_cast<std::size_t>(i), p.x, p.y);
            }
        return;
    }
    case PrimitiveKind::FACE: {
        const auto& f = std::get<FaceInfo>(info);
        const Vec2 o = f.coords[0], u = f.coords[1] - f.coords[0], v = f.coords[2] - f.coords[0];
        for_each_face_owned(kind, level, layout, [&](DoFGroup g, int c, int r, std::size_t idx) {
            double lx = 0, ly = 0;
            group_lattice_coord(g, c, r, lx, ly);
            const Vec2 p = o + (lx / n) * u + (ly / n) * v;
            fn(idx, p.x, p.y);
        });
        return;
    }
    }
    throw std::invalid_argument("for_each_owned_coord: bad primitive kind");
}

} // namespace hytegrid
