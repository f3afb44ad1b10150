#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hytegrid {

/// DoF groups of the refined macro-face lattice. Refinement level L induces
/// n = 2^L micro-intervals per macro-edge; every group forms a triangular
/// lattice addressed by (col, row):
///   VERTEX          (c, r),         c+r <= n      lattice vertices
///   EDGE_HORIZONTAL (c+1/2, r),     c+r <= n-1    midpoints of (c,r)-(c+1,r)
///   EDGE_DIAGONAL   (c+1/2, r+1/2), c+r <= n-1    midpoints of (c+1,r)-(c,r+1)
///   EDGE_VERTICAL   (c, r+1/2),     c+r <= n-1    midpoints of (c,r)-(c,r+1)
///   FACE_UP         up-cells (c,r): corners (c,r),(c+1,r),(c,r+1), c+r <= n-1
///   FACE_DOWN       down-cells (c,r): corners (c+1,r),(c,r+1),(c+1,r+1), c+r <= n-2
enum class DoFGroup : std::uint8_t {
    VERTEX = 0,
    EDGE_HORIZONTAL = 1,
    EDGE_DIAGONAL = 2,
    EDGE_VERTICAL = 3,
    FACE_UP = 4,
    FACE_DOWN = 5,
};

enum class FunctionKind : std::uint8_t { P1 = 0, P2 = 1, DG0 = 2 };

enum class Orientation : std::uint8_t { FORWARD = 0, REVERSED = 1 };

struct TopoIndex {
    DoFGroup group = DoFGroup::VERTEX;
    int col = 0;
    int row = 0;
};

const char* to_string(DoFGroup g);
const char* to_string(FunctionKind k);

inline int micro_edges_per_edge(int level) { return 1 << level; }

/// Rows of a group's triangular lattice have length base_width - row.
inline int group_base_width(DoFGroup g, int level) {
    const int n = micro_edges_per_edge(level);
    switch (g) {
    case DoFGroup::VERTEX: return n + 1;
    case DoFGroup::FACE_DOWN: return n - 1;
    default: return n;
    }
}

inline std::size_t triangle_number(int w) { return static_cast<std::size_t>(w) * (w + 1) / 2; }

/// Number of DoFs of one group on one macro-face.
inline std::size_t group_count(int level, DoFGroup g) {
    return triangle_number(group_base_width(g, level));
}

/// Exchangeable array layout for triangular lattices: a bijection
/// (width, col, row) -> [0, width*(width+1)/2). Kernels address data only
/// through a layout object, so layouts can be swapped without touching any
/// kernel. Two layouts are provided; results must be identical under both.
class TriangleLayout {
  public:
    enum class Scheme : std::uint8_t {
        ROW_MAJOR = 0, // bottom row first: index = row*w - row*(row-1)/2 + col
        ROW_REVERSED = 1,
    };

    constexpr explicit TriangleLayout(Scheme s = Scheme::ROW_MAJOR) : scheme_(s) {}

    std::size_t index(int width, int col, int row) const {
        if (scheme_ == Scheme::ROW_MAJOR)
            return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) -
                   static_cast<std::size_t>(row) * (row - 1) / 2 + static_cast<std::size_t>(col);
        const int above = width - row - 1; // rows stored before row `row`
        return static_cast<std::size_t>(above) * (above + 1) / 2 + static_cast<std::size_t>(col);
    }

    Scheme scheme() const { return scheme_; }

  private:
    Scheme scheme_;
};

inline const TriangleLayout& row_major_layout() {
    static const TriangleLayout l(TriangleLayout::Scheme::ROW_MAJOR);
    return l;
}
inline const TriangleLayout& row_reversed_layout() {
    static const TriangleLayout l(TriangleLayout::Scheme::ROW_REVERSED);
    return l;
}

/// Index of a DoF within its group block on a macro-face.
inline std::size_t linear_index(const TriangleLayout& layout, int level, TopoIndex t) {
    const int w = group_base_width(t.group, level);
    if (t.col < 0 || t.row < 0 || t.col + t.row >= w)
        throw std::out_of_range("linear_index: topological index outside lattice");
    return layout.index(w, t.col, t.row);
}

/// Owned-DoF counts per primitive kind (ownership: a face owns its interior,
/// an edge its line interior plus P2 on-edge midpoints, a vertex its value;
/// DG0 cells all belong to the face).
std::size_t owned_count(FunctionKind kind, int primitive_dimension, int level);

// --------------------------------------------------------------------------
// Border walks. Slot s of a face is walked in its canonical direction
// (slot 0: v0->v1 along row 0; slot 1: v0->v2 along col 0; slot 2: v1->v2
// along the anti-diagonal). border_dof(g, level, slot, offset, k) is the k-th
// DoF of group g in the lattice row at distance `offset` from the border.
// --------------------------------------------------------------------------

int border_row_length(DoFGroup g, int level, int offset);
TopoIndex border_dof(DoFGroup g, int level, int slot, int offset, int k);

/// Linear indices (within the group block) of one border row, walk-ordered;
/// REVERSED flips the walk direction. offset 0 is the border itself, offset 1
/// the adjacent inner row used for halo provisioning.
std::vector<std::size_t> border_indices(const TriangleLayout& layout, int level, DoFGroup g, int slot,
                                        Orientation o, int offset = 0);

/// Lattice coordinate (units of 1/n before scaling) of a group DoF; cells map
/// to centroids, edge groups to midpoints.
void group_lattice_coord(DoFGroup g, int col, int row, double& x, double& y);

} // namespace hytegrid
