#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hytegrid/elements.hpp"
#include "hytegrid/function.hpp"
#include "hytegrid/numbering.hpp"
#include "hytegrid/sparse.hpp"

namespace hytegrid {

/// One coefficient of a face-row stencil: the neighbor DoF sits at
/// (group, c + dc, r + dr) relative to the receiving (c, r). group_off and
/// width are the neighbor group's storage offset and lattice base width,
/// resolved at assembly so apply only performs the layout index map.
struct FaceStencilEntry {
    DoFGroup group = DoFGroup::VERTEX;
    int dc = 0;
    int dr = 0;
    double coeff = 0;
    std::size_t group_off = 0;
    int width = 0;
};

/// One coefficient of an edge-row stencil. Every row of edge storage the
/// stencil touches (line, midline, halo rows) advances together with the
/// receiving position, so the neighbor slot is row_base + (k + dk) for the
/// receiving line/midline index k.
struct EdgeStencilTerm {
    std::size_t row_base = 0;
    std::ptrdiff_t dk = 0;
    double coeff = 0;
};

/// One coefficient of the vertex row, by absolute storage slot.
struct VertexStencilTerm {
    std::size_t slot = 0;
    double coeff = 0;
};

/// Constant stencils of one primitive at one level; only the parts matching
/// the primitive's kind are populated. Face tables are keyed by receiving
/// group (P2: the vertex group plus the three edge orientations).
struct StencilTable {
    std::map<DoFGroup, std::vector<FaceStencilEntry>> face;
    std::vector<EdgeStencilTerm> edge_line;
    std::vector<EdgeStencilTerm> edge_mid;
    std::vector<VertexStencilTerm> vertex;

    std::map<DoFGroup, double> face_diag;
    double edge_line_diag = 0;
    double edge_mid_diag = 0;
    double vertex_diag = 0;
};

/// Builds the constant stencils of `p` for one form, kind, and level: the
/// coefficient for (receiving DoF, neighbor) is the sum of element-matrix
/// entries over all micro-triangles containing both. Edge and vertex rows
/// accumulate the contributions of every incident face, addressed through
/// the halo/ghost storage that the sync schedule keeps current. Throws
/// std::invalid_argument for DG0.
StencilTable assemble_stencils(const Primitive& p, int level, Form form, FunctionKind kind);

/// Matrix-free constant-coefficient operator. Stencils are precomputed for
/// every local primitive and every level in [min_level, max_level] at
/// construction; rows whose DoF is flagged DIRICHLET act as identity rows.
/// Row flags come from the output-space function (apply: dst, smoothers: x),
/// which must carry the same boundary conditions as the operator; the input
/// function of apply is only read, so mixed-space blocks (divergence,
/// gradient) take a src living under different boundary conditions.
class StencilOperator {
  public:
    StencilOperator(DistributedDomain& domain, Form form, FunctionKind kind, int min_level,
                    int max_level, BoundaryConditions bc = {});

    DistributedDomain& domain() const { return *domain_; }
    Form form() const { return form_; }
    FunctionKind kind() const { return kind_; }
    int min_level() const { return min_level_; }
    int max_level() const { return max_level_; }
    const BoundaryConditions& boundary_conditions() const { return bc_; }

    /// Stencils of one primitive at one level; throws std::out_of_range when
    /// no stencil was assembled for that pair.
    const StencilTable& table(PrimitiveID id, int level) const;

  private:
    DistributedDomain* domain_;
    Form form_;
    FunctionKind kind_;
    int min_level_;
    int max_level_;
    BoundaryConditions bc_;
    std::map<std::pair<std::uint64_t, int>, StencilTable> tables_;
};

/// dst := A*src on owned rows whose flag is in flag_mask (other rows are left
/// untouched). Ghosts of src may be stale on entry: the call first runs the
/// kind's full exchange schedule (vertex->edge, edge->face, face->edge,
/// edge->vertex, so every relayed halo entry is forwarded fresh), then
/// processes macro-vertex, macro-edge, and macro-face rows phase by phase.
/// The owned result equals the assembled-matrix product. Row flags are dst's;
/// on DIRICHLET rows inside the mask dst is set to src's value, so apply
/// off-diagonal blocks with the INNER|NEUMANN mask.
void apply(const StencilOperator& A, Controller& c, const ScalarFunction& src, ScalarFunction& dst,
           int level, std::uint8_t flag_mask = ALL_DOF_FLAGS);

/// One damped Jacobi sweep x <- x + omega*D^-1*(rhs - A*x) on INNER/NEUMANN
/// rows (DIRICHLET rows keep their value). Syncs x's ghosts first.
void smooth_jacobi(const StencilOperator& A, Controller& c, const ScalarFunction& rhs,
                   ScalarFunction& x, double omega, int level);

/// One hybrid Gauss-Seidel sweep: within each macro-primitive the owned DoFs
/// update in place in lattice order; halo values stay frozen at their state
/// after the initial sync, so primitives couple Jacobi-style and the result
/// is independent of the partition.
void smooth_gs(const StencilOperator& A, Controller& c, const ScalarFunction& rhs,
               ScalarFunction& x, int level);

/// Writes the operator's matrix diagonal into d's owned DoFs (1 on DIRICHLET
/// rows).
void diagonal(const StencilOperator& A, ScalarFunction& d, int level);

/// Explicit sparse matrix over the numbering's owned DoFs, equal row by row
/// to what apply computes; the matrix-free/assembled pair is the library's
/// main correctness oracle and the coarse-solver input. Levels above 5 are
/// rejected to keep the explicit matrix at desk scale.
SparseMatrix assemble_global_sparse(const StencilOperator& A, int level,
                                    const GlobalDoFMap& numbering);

} // namespace hytegrid
