#include "hytegrid/indexing.hpp"

namespace hytegrid {

const char* to_string(DoFGroup g) {
    switch (g) {
    case DoFGroup::VERTEX: return "VERTEX";
    case DoFGroup::EDGE_HORIZONTAL: return "EDGE_HORIZONTAL";
    case DoFGroup::EDGE_DIAGONAL: return "EDGE_DIAGONAL";
    case DoFGroup::EDGE_VERTICAL: return "EDGE_VERTICAL";
    case DoFGroup::FACE_UP: return "FACE_UP";
    case DoFGroup::FACE_DOWN: return "FACE_DOWN";
    }
    return "?";
}

const char* to_string(FunctionKind k) {
    switch (k) {
    case FunctionKind::P1: return "P1";
    case FunctionKind::P2: return "P2";
    case FunctionKind::DG0: return "DG0";
    }
    return "?";
}

std::size_t owned_count(FunctionKind kind, int primitive_dimension, int level) {
    if (level < 1)
        throw std::invalid_argument("owned_count: level must be >= 1");
    const std::size_t n = static_cast<std::size_t>(micro_edges_per_edge(level));
    switch (kind) {
    case FunctionKind::P1:
        switch (primitive_dimension) {
        case 0: return 1;
        case 1: return n - 1;
        case 2: return (n - 1) * (n - 2) / 2;
        }
        break;
    case FunctionKind::P2:
        switch (primitive_dimension) {
        case 0: return 1;
        case 1: return (n - 1) + n;
        case 2: return (n - 1) * (n - 2) / 2 + 3 * (n * (n + 1) / 2 - n);
        }
        break;
    case FunctionKind::DG0:
        switch (primitive_dimension) {
        case 0: return 0;
        case 1: return 0;
        case 2: return n * n;
        }
        break;
    }
    throw std::invalid_argument("owned_count: primitive dimension must be 0, 1 or 2");
}

int border_row_length(DoFGroup g, int level, int offset) {
    const int len = group_base_width(g, level) - offset;
    return len > 0 ? len : 0;
}

TopoIndex border_dof(DoFGroup g, int level, int slot, int offset, int k) {
    const int w = group_base_width(g, level);
    const int len = w - offset;
    if (offset < 0 || k < 0 || k >= len)
        throw std::out_of_range("border_dof: position outside the requested border row");
    switch (slot) {
    case 0: return {g, k, offset};                    // row `offset`, col ascending
    case 1: return {g, offset, k};                    // col `offset`, row ascending
    case 2: return {g, (w - 1 - offset) - k, k};       // anti-diagonal, row ascending
    default: throw std::out_of_range("border_dof: slot must be 0, 1 or 2");
    }
}

std::vector<std::size_t> border_indices(const TriangleLayout& layout, int level, DoFGroup g, int slot,
                                        Orientation o, int offset) {
    const int len = border_row_length(g, level, offset);
    std::vector<std::size_t> out(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) {
        const int kk = (o == Orientation::FORWARD) ? k : len - 1 - k;
        out[static_cast<std::size_t>(k)] = linear_index(layout, level, border_dof(g, level, slot, offset, kk));
    }
    return out;
}

void group_lattice_coord(DoFGroup g, int col, int row, double& x, double& y) {
    switch (g) {
    case DoFGroup::VERTEX: x = col; y = row; return;
    case DoFGroup::EDGE_HORIZONTAL: x = col + 0.5; y = row; return;
    case DoFGroup::EDGE_DIAGONAL: x = col + 0.5; y = row + 0.5; return;
    case DoFGroup::EDGE_VERTICAL: x = col; y = row + 0.5; return;
    case DoFGroup::FACE_UP: x = col + 1.0 / 3.0; y = row + 1.0 / 3.0; return;
    case DoFGroup::FACE_DOWN: x = col + 2.0 / 3.0; y = row + 2.0 / 3.0; return;
    }
    throw std::invalid_argument("group_lattice_coord: bad group");
}

} // namespace hytegrid
