#include "hytegrid/operators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "hytegrid/field.hpp"

namespace hytegrid {

namespace {

// --- micro-topology ---------------------------------------------------------

struct TriDoF {
    DoFGroup g = DoFGroup::VERTEX;
    int dc = 0, dr = 0;
};

/// DoFs of the up/down cell at lattice (c, r) as offsets from (c, r), in
/// element order v0,v1,v2[,m01,m12,m20].
std::vector<TriDoF> cell_dofs(bool up, FunctionKind kind) {
    std::vector<TriDoF> d;
    if (up) {
        d = {{DoFGroup::VERTEX, 0, 0}, {DoFGroup::VERTEX, 1, 0}, {DoFGroup::VERTEX, 0, 1}};
        if (kind == FunctionKind::P2) {
            d.push_back({DoFGroup::EDGE_HORIZONTAL, 0, 0});
            d.push_back({DoFGroup::EDGE_DIAGONAL, 0, 0});
            d.push_back({DoFGroup::EDGE_VERTICAL, 0, 0});
        }
    } else {
        d = {{DoFGroup::VERTEX, 1, 0}, {DoFGroup::VERTEX, 0, 1}, {DoFGroup::VERTEX, 1, 1}};
        if (kind == FunctionKind::P2) {
            d.push_back({DoFGroup::EDGE_DIAGONAL, 0, 0});
            d.push_back({DoFGroup::EDGE_HORIZONTAL, 0, 1});
            d.push_back({DoFGroup::EDGE_VERTICAL, 1, 0});
        }
    }
    return d;
}

struct MicroCell {
    bool up = true;
    int c = 0, r = 0;
};

/// Cells whose element matrix couples the group-g DoF at (c, r).
std::vector<MicroCell> incident_cells(DoFGroup g, int c, int r) {
    switch (g) {
    case DoFGroup::VERTEX:
        return {{true, c, r},      {true, c - 1, r},  {true, c, r - 1},
                {false, c - 1, r}, {false, c, r - 1}, {false, c - 1, r - 1}};
    case DoFGroup::EDGE_HORIZONTAL: return {{true, c, r}, {false, c, r - 1}};
    case DoFGroup::EDGE_DIAGONAL: return {{true, c, r}, {false, c, r}};
    case DoFGroup::EDGE_VERTICAL: return {{true, c, r}, {false, c - 1, r}};
    default: throw std::invalid_argument("incident_cells: not a nodal group");
    }
}

bool cell_inside(const MicroCell& t, int n) {
    return t.c >= 0 && t.r >= 0 && t.c + t.r <= (t.up ? n - 1 : n - 2);
}

/// Element matrices of a face's two micro-triangle congruence classes.
struct CellMatrices {
    ElementMatrix up, down;
};

CellMatrices face_elements(Form form, FunctionKind kind, const std::array<Vec2, 3>& corners,
                           int level) {
    const double inv = 1.0 / micro_edges_per_edge(level);
    const Vec2 u = inv * (corners[1] - corners[0]);
    const Vec2 v = inv * (corners[2] - corners[0]);
    return {local_stiffness(form, kind, {Vec2{0, 0}, u, v}),
            local_stiffness(form, kind, {u, v, u + v})};
}

/// Distance of a lattice DoF from the border at `slot`, in rows of its group.
int border_offset_of(DoFGroup g, int level, int slot, int c, int r) {
    const int w = group_base_width(g, level);
    switch (slot) {
    case 0: return r;
    case 1: return c;
    case 2: return (w - 1) - (c + r);
    }
    throw std::out_of_range("border_offset_of: slot " + std::to_string(slot));
}

int walk_coord_of(int slot, int c, int r) { return slot == 0 ? c : r; }

// --- per-kind stencil assembly ----------------------------------------------

void assemble_face(StencilTable& out, Form form, FunctionKind kind, const FaceInfo& f, int level) {
    const CellMatrices E = face_elements(form, kind, f.coords, level);
    for (const DoFGroup g : field_groups(kind)) {
        std::map<std::tuple<DoFGroup, int, int>, double> acc;
        for (const MicroCell cell : incident_cells(g, 0, 0)) {
            const auto dofs = cell_dofs(cell.up, kind);
            const ElementMatrix& M = cell.up ? E.up : E.down;
            int irecv = -1;
            for (std::size_t i = 0; i < dofs.size(); ++i)
                if (dofs[i].g == g && cell.c + dofs[i].dc == 0 && cell.r + dofs[i].dr == 0)
                    irecv = static_cast<int>(i);
            if (irecv < 0)
                throw std::logic_error("assemble_face: receiving DoF missing from its cell");
            for (std::size_t j = 0; j < dofs.size(); ++j)
                acc[{dofs[j].g, cell.c + dofs[j].dc, cell.r + dofs[j].dr}] +=
                    M.at(irecv, static_cast<int>(j));
        }
        auto& entries = out.face[g];
        for (const auto& [key, coeff] : acc) {
            const auto& [ng, dc, dr] = key;
            entries.push_back({ng, dc, dr, coeff, face_group_offset(kind, level, ng),
                               group_base_width(ng, level)});
        }
        out.face_diag[g] = acc.at({g, 0, 0});
    }
}

struct RowPos {
    std::size_t base = 0;
    std::ptrdiff_t entry = 0;
};

/// Edge-storage position of the face-lattice DoF (g, c, r) of the fi-th
/// neighbor face: border rows resolve to the line/midline, everything else
/// to the face's halo rows.
RowPos edge_position(const EdgeInfo& e, std::size_t fi, FunctionKind kind, int level, DoFGroup g,
                     int c, int r) {
    const auto& nb = e.faces[fi];
    const int n = micro_edges_per_edge(level);
    const int o = border_offset_of(g, level, nb.slot, c, r);
    const int w = walk_coord_of(nb.slot, c, r);
    if (g == DoFGroup::VERTEX && o == 0)
        return {0, nb.aligned ? w : n - w};
    if (kind == FunctionKind::P2 && g == parallel_group(nb.slot) && o == 0)
        return {edge_midline_offset(level), nb.aligned ? w : (n - 1) - w};
    const int len = border_row_length(g, level, o);
    const std::size_t base =
        edge_halo_offset(kind, level, e, fi) + edge_halo_row_offset(kind, level, nb.slot, g, o);
    return {base, nb.aligned ? w : (len - 1) - w};
}

void accumulate_edge_row(std::map<std::pair<std::size_t, std::ptrdiff_t>, double>& acc,
                         const CellMatrices& E, const EdgeInfo& e, std::size_t fi,
                         FunctionKind kind, int level, TopoIndex recv, int k0) {
    const int n = micro_edges_per_edge(level);
    for (const MicroCell cell : incident_cells(recv.group, recv.col, recv.row)) {
        if (!cell_inside(cell, n))
            continue;
        const auto dofs = cell_dofs(cell.up, kind);
        const ElementMatrix& M = cell.up ? E.up : E.down;
        int irecv = -1;
        for (std::size_t i = 0; i < dofs.size(); ++i)
            if (dofs[i].g == recv.group && cell.c + dofs[i].dc == recv.col &&
                cell.r + dofs[i].dr == recv.row)
                irecv = static_cast<int>(i);
        if (irecv < 0)
            throw std::logic_error("assemble_edge: receiving DoF missing from its cell");
        for (std::size_t j = 0; j < dofs.size(); ++j) {
            const RowPos p = edge_position(e, fi, kind, level, dofs[j].g, cell.c + dofs[j].dc,
                                           cell.r + dofs[j].dr);
            acc[{p.base, p.entry - k0}] += M.at(irecv, static_cast<int>(j));
        }
    }
}

void assemble_edge(StencilTable& out, Form form, FunctionKind kind, const EdgeInfo& e, int level) {
    const int n = micro_edges_per_edge(level);
    std::map<std::pair<std::size_t, std::ptrdiff_t>, double> line_acc, mid_acc;
    for (std::size_t fi = 0; fi < e.faces.size(); ++fi) {
        const auto& nb = e.faces[fi];
        const CellMatrices E = face_elements(form, kind, nb.corners, level);
        if (n >= 2) {
            // Reference interior line DoF k0 = 1; every term's position is
            // affine in k with unit slope, so offsets derived at k0 hold for
            // all interior k.
            const int k0 = 1;
            const int w0 = nb.aligned ? k0 : n - k0;
            accumulate_edge_row(line_acc, E, e, fi, kind, level,
                                border_dof(DoFGroup::VERTEX, level, nb.slot, 0, w0), k0);
        }
        if (kind == FunctionKind::P2) {
            const int m0 = 0;
            const int w0 = nb.aligned ? m0 : (n - 1) - m0;
            accumulate_edge_row(mid_acc, E, e, fi, kind, level,
                                border_dof(parallel_group(nb.slot), level, nb.slot, 0, w0), m0);
        }
    }
    for (const auto& [key, coeff] : line_acc)
        out.edge_line.push_back({key.first, key.second, coeff});
    for (const auto& [key, coeff] : mid_acc)
        out.edge_mid.push_back({key.first, key.second, coeff});
    if (!line_acc.empty())
        out.edge_line_diag = line_acc.at({0, 0});
    if (!mid_acc.empty())
        out.edge_mid_diag = mid_acc.at({edge_midline_offset(level), 0});
}

std::size_t edge_index_of(const VertexInfo& v, PrimitiveID eid) {
    const auto it = std::find(v.edges.begin(), v.edges.end(), eid);
    if (it == v.edges.end())
        throw std::logic_error("assemble_vertex: flank edge not among the incident edges");
    return static_cast<std::size_t>(it - v.edges.begin());
}

void assemble_vertex(StencilTable& out, Form form, FunctionKind kind, const VertexInfo& v,
                     int level) {
    const int n = micro_edges_per_edge(level);
    static constexpr int corner_slots[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    std::map<std::size_t, double> acc;
    for (std::size_t fvi = 0; fvi < v.faces.size(); ++fvi) {
        const auto& vf = v.faces[fvi];
        const ElementMatrix M = face_elements(form, kind, vf.corners, level).up;
        const int ci = vf.corner_idx;
        // The corner's only incident micro-triangle is an up-cell, and the
        // corner is that cell's local vertex ci.
        const MicroCell cell = ci == 0   ? MicroCell{true, 0, 0}
                               : ci == 1 ? MicroCell{true, n - 1, 0}
                                         : MicroCell{true, 0, n - 1};
        const auto dofs = cell_dofs(true, kind);
        for (std::size_t j = 0; j < dofs.size(); ++j) {
            const double coeff = M.at(ci, static_cast<int>(j));
            if (static_cast<int>(j) == ci) {
                acc[0] += coeff;
                continue;
            }
            const DoFGroup g = dofs[j].g;
            const int c = cell.c + dofs[j].dc;
            const int r = cell.r + dofs[j].dr;
            if (g == DoFGroup::VERTEX) {
                int pick = -1;
                for (const int s : corner_slots[ci])
                    if (border_offset_of(g, level, s, c, r) == 0) {
                        pick = s;
                        break;
                    }
                if (pick < 0)
                    throw std::logic_error("assemble_vertex: neighbor vertex off the flank borders");
                const PrimitiveID eid = vf.flank_edges[pick == corner_slots[ci][0] ? 0 : 1];
                acc[vertex_edge_ghost_offset(kind, edge_index_of(v, eid))] += coeff;
                continue;
            }
            int pick = -1;
            for (const int s : corner_slots[ci])
                if (g == parallel_group(s) && border_offset_of(g, level, s, c, r) == 0) {
                    pick = s;
                    break;
                }
            if (pick >= 0) {
                const PrimitiveID eid = vf.flank_edges[pick == corner_slots[ci][0] ? 0 : 1];
                acc[vertex_edge_ghost_offset(kind, edge_index_of(v, eid)) + 1] += coeff;
            } else {
                acc[vertex_face_ghost_offset(kind, v, fvi)] += coeff;
            }
        }
    }
    for (const auto& [slot, coeff] : acc)
        out.vertex.push_back({slot, coeff});
    out.vertex_diag = acc.at(0);
}

// --- row traversal ----------------------------------------------------------

/// Streams every owned row of one primitive: begin(slot) -> bool gates the
/// row, term(slot, coeff) streams its neighbor coefficients, end(slot, diag)
/// closes it. Traversal order matches for_each_owned.
template <class BeginRow, class Term, class EndRow>
void visit_rows(const StencilTable& t, FunctionKind kind, PrimitiveKind pk, int level,
                const TriangleLayout& layout, BeginRow begin, Term term, EndRow end) {
    const int n = micro_edges_per_edge(level);
    switch (pk) {
    case PrimitiveKind::VERTEX: {
        if (kind == FunctionKind::DG0 || !begin(0))
            return;
        for (const auto& vt : t.vertex)
            term(vt.slot, vt.coeff);
        end(std::size_t{0}, t.vertex_diag);
        return;
    }
    case PrimitiveKind::EDGE: {
        for (int k = 1; k <= n - 1; ++k) {
            const auto slot = static_cast<std::size_t>(k);
            if (!begin(slot))
                continue;
            for (const auto& et : t.edge_line)
                term(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(et.row_base) + k + et.dk),
                     et.coeff);
            end(slot, t.edge_line_diag);
        }
        if (kind == FunctionKind::P2) {
            const std::size_t mid = edge_midline_offset(level);
            for (int m = 0; m < n; ++m) {
                const std::size_t slot = mid + static_cast<std::size_t>(m);
                if (!begin(slot))
                    continue;
                for (const auto& et : t.edge_mid)
                    term(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(et.row_base) + m +
                                                  et.dk),
                         et.coeff);
                end(slot, t.edge_mid_diag);
            }
        }
        return;
    }
    case PrimitiveKind::FACE: {
        for_each_face_owned(kind, level, layout, [&](DoFGroup g, int c, int r, std::size_t slot) {
            if (!begin(slot))
                return;
            for (const auto& fe : t.face.at(g))
                term(fe.group_off + layout.index(fe.width, c + fe.dc, r + fe.dr), fe.coeff);
            end(slot, t.face_diag.at(g));
        });
        return;
    }
    }
    throw std::invalid_argument("visit_rows: bad primitive kind");
}

void check_function(const StencilOperator& A, const ScalarFunction& f, int level, const char* what,
                    bool check_bc) {
    if (&f.domain() != &A.domain())
        throw std::invalid_argument(std::string(what) + ": function lives on a different domain");
    if (f.kind() != A.kind())
        throw std::invalid_argument(std::string(what) + ": function kind differs from the operator");
    if (level < f.min_level() || level > f.max_level() || level < A.min_level() ||
        level > A.max_level())
        throw std::out_of_range(std::string(what) + ": level " + std::to_string(level) +
                                " outside the allocated range");
    if (check_bc && f.boundary_conditions().marker_flag != A.boundary_conditions().marker_flag)
        throw std::invalid_argument(std::string(what) +
                                    ": boundary conditions differ from the operator's");
}

constexpr PrimitiveKind kPhases[3] = {PrimitiveKind::VERTEX, PrimitiveKind::EDGE,
                                      PrimitiveKind::FACE};

} // namespace

StencilTable assemble_stencils(const Primitive& p, int level, Form form, FunctionKind kind) {
    if (kind == FunctionKind::DG0)
        throw std::invalid_argument("assemble_stencils: DG0 carries no stencil forms");
    StencilTable t;
    switch (p.kind) {
    case PrimitiveKind::VERTEX: assemble_vertex(t, form, kind, p.vertex(), level); break;
    case PrimitiveKind::EDGE: assemble_edge(t, form, kind, p.edge(), level); break;
    case PrimitiveKind::FACE: assemble_face(t, form, kind, p.face(), level); break;
    }
    return t;
}

StencilOperator::StencilOperator(DistributedDomain& domain, Form form, FunctionKind kind,
                                 int min_level, int max_level, BoundaryConditions bc)
    : domain_(&domain), form_(form), kind_(kind), min_level_(min_level), max_level_(max_level),
      bc_(std::move(bc)) {
    if (kind_ == FunctionKind::DG0)
        throw std::invalid_argument("StencilOperator: DG0 carries no stencil forms");
    if (min_level_ < 0 || max_level_ < min_level_)
        throw std::invalid_argument("StencilOperator: bad level range [" +
                                    std::to_string(min_level_) + ", " +
                                    std::to_string(max_level_) + "]");
    for (int r = 0; r < domain.ranks(); ++r)
        for (const auto& [id, p] : domain.graph(r).local)
            for (int level = min_level_; level <= max_level_; ++level)
                tables_.emplace(std::make_pair(id.value, level),
                                assemble_stencils(p, level, form_, kind_));
}

const StencilTable& StencilOperator::table(PrimitiveID id, int level) const {
    const auto it = tables_.find({id.value, level});
    if (it == tables_.end())
        throw std::out_of_range("StencilOperator: no stencil for primitive " +
                                std::to_string(id.value) + " at level " + std::to_string(level));
    return it->second;
}

void apply(const StencilOperator& A, Controller& c, const ScalarFunction& src, ScalarFunction& dst,
           int level, std::uint8_t flag_mask) {
    check_function(A, src, level, "apply", false);
    check_function(A, dst, level, "apply", true);
    if (&src == &dst)
        throw std::invalid_argument("apply: src and dst must be distinct functions");
    if (src.layout().scheme() != dst.layout().scheme())
        throw std::invalid_argument("apply: src and dst use different layout schemes");

    // Ghost exchange first — the full schedule forwards every relayed halo
    // entry fresh — then the three processing phases in dimension order.
    sync_all(c, src, level);
    DistributedDomain& dom = A.domain();
    const TriangleLayout& layout = src.layout();
    for (const PrimitiveKind phase : kPhases)
        for (int r = 0; r < dom.ranks(); ++r)
            for (auto& [id, p] : dom.graph(r).local) {
                if (p.kind != phase)
                    continue;
                const StencilTable& t = A.table(id, level);
                const auto& sv = field_values(std::as_const(p), src.handle(), level);
                const auto& fl = field_flags(std::as_const(p), dst.handle(), level);
                auto& dv = field_values(p, dst.handle(), level);
                double acc = 0;
                visit_rows(
                    t, A.kind(), p.kind, level, layout,
                    [&](std::size_t slot) {
                        const std::uint8_t f = fl[slot];
                        if (!(f & flag_mask))
                            return false;
                        if (f & flag_bit(DoFFlag::DIRICHLET)) {
                            dv[slot] = sv[slot];
                            return false;
                        }
                        acc = 0;
                        return true;
                    },
                    [&](std::size_t slot, double coeff) { acc += coeff * sv[slot]; },
                    [&](std::size_t slot, double) { dv[slot] = acc; });
            }
}

namespace {

void smooth(const StencilOperator& A, Controller& c, const ScalarFunction& rhs, ScalarFunction& x,
            int level, bool jacobi, double omega, const char* what) {
    check_function(A, rhs, level, what, true);
    check_function(A, x, level, what, true);
    if (&rhs == &x)
        throw std::invalid_argument(std::string(what) + ": rhs and x must be distinct functions");
    if (rhs.layout().scheme() != x.layout().scheme())
        throw std::invalid_argument(std::string(what) + ": rhs and x use different layout schemes");

    sync_all(c, x, level);
    DistributedDomain& dom = A.domain();
    const TriangleLayout& layout = x.layout();
    std::vector<std::pair<std::size_t, double>> pending; // Jacobi write-back buffer
    for (const PrimitiveKind phase : kPhases)
        for (int r = 0; r < dom.ranks(); ++r)
            for (auto& [id, p] : dom.graph(r).local) {
                if (p.kind != phase)
                    continue;
                const StencilTable& t = A.table(id, level);
                const auto& rv = field_values(std::as_const(p), rhs.handle(), level);
                const auto& fl = field_flags(std::as_const(p), x.handle(), level);
                auto& xv = field_values(p, x.handle(), level);
                pending.clear();
                double acc = 0;
                visit_rows(
                    t, A.kind(), p.kind, level, layout,
                    [&](std::size_t slot) {
                        if (fl[slot] & flag_bit(DoFFlag::DIRICHLET))
                            return false;
                        acc = 0;
                        return true;
                    },
                    [&](std::size_t slot, double coeff) { acc += coeff * xv[slot]; },
                    [&](std::size_t slot, double diag) {
                        if (diag == 0.0)
                            throw std::runtime_error(std::string(what) + ": zero diagonal entry");
                        // acc includes the diagonal term, so (rhs - acc)/diag
                        // is the pointwise correction.
                        const double upd = xv[slot] + omega * (rv[slot] - acc) / diag;
                        if (jacobi)
                            pending.emplace_back(slot, upd);
                        else
                            xv[slot] = upd;
                    });
                for (const auto& [slot, val] : pending)
                    xv[slot] = val;
            }
}

} // namespace

void smooth_jacobi(const StencilOperator& A, Controller& c, const ScalarFunction& rhs,
                   ScalarFunction& x, double omega, int level) {
    smooth(A, c, rhs, x, level, true, omega, "smooth_jacobi");
}

void smooth_gs(const StencilOperator& A, Controller& c, const ScalarFunction& rhs,
               ScalarFunction& x, int level) {
    smooth(A, c, rhs, x, level, false, 1.0, "smooth_gs");
}

void diagonal(const StencilOperator& A, ScalarFunction& d, int level) {
    check_function(A, d, level, "diagonal", true);
    DistributedDomain& dom = A.domain();
    const TriangleLayout& layout = d.layout();
    for (int r = 0; r < dom.ranks(); ++r)
        for (auto& [id, p] : dom.graph(r).local) {
            const StencilTable& t = A.table(id, level);
            const auto& fl = field_flags(std::as_const(p), d.handle(), level);
            auto& dv = field_values(p, d.handle(), level);
            visit_rows(
                t, A.kind(), p.kind, level, layout,
                [&](std::size_t slot) {
                    if (fl[slot] & flag_bit(DoFFlag::DIRICHLET)) {
                        dv[slot] = 1.0;
                        return false;
                    }
                    return true;
                },
                [&](std::size_t, double) {},
                [&](std::size_t slot, double diag) { dv[slot] = diag; });
        }
}

SparseMatrix assemble_global_sparse(const StencilOperator& A, int level,
                                    const GlobalDoFMap& numbering) {
    if (level > 5)
        throw std::invalid_argument("assemble_global_sparse: level " + std::to_string(level) +
                                    " above the explicit-assembly cap (5)");
    if (&numbering.domain() != &A.domain() || numbering.kind() != A.kind())
        throw std::invalid_argument("assemble_global_sparse: numbering does not match the operator");
    if (numbering.level() != level)
        throw std::invalid_argument("assemble_global_sparse: numbering was built for level " +
                                    std::to_string(numbering.level()));
    if (level < A.min_level() || level > A.max_level())
        throw std::out_of_range("assemble_global_sparse: level " + std::to_string(level) +
                                " outside the operator's range");

    SparseMatrix M(numbering.size(), numbering.size());
    const TriangleLayout& layout = numbering.layout();
    const DistributedDomain& dom = A.domain();
    for (int r = 0; r < dom.ranks(); ++r)
        for (const auto& [id, p] : dom.graph(r).local) {
            const StencilTable& t = A.table(id, level);
            const auto flags =
                compute_flags(A.kind(), p.kind, p.info, level, A.boundary_conditions(), layout);
            std::size_t grow = 0;
            visit_rows(
                t, A.kind(), p.kind, level, layout,
                [&](std::size_t slot) {
                    grow = numbering.global_index(id, slot);
                    if (flags[slot] & flag_bit(DoFFlag::DIRICHLET)) {
                        M.set(grow, grow, 1.0);
                        return false;
                    }
                    return true;
                },
                [&](std::size_t slot, double coeff) {
                    M.add(grow, numbering.global_index(id, slot), coeff);
                },
                [&](std::size_t, double) {});
        }
    return M;
}

} // namespace hytegrid
