#include "hytegrid/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hytegrid/field.hpp"
#include "hytegrid/layout.hpp"

namespace hytegrid {

namespace {

const std::uint8_t kSmoothMask = flag_bit(DoFFlag::INNER) | flag_bit(DoFFlag::NEUMANN);
const std::uint8_t kDirichletMask = flag_bit(DoFFlag::DIRICHLET);

double zero_expr(double, double) { return 0.0; }

void check_transfer(const ScalarFunction& coarse, const ScalarFunction& fine, int coarse_level,
                    const char* what) {
    if (coarse.kind() != FunctionKind::P1 || fine.kind() != FunctionKind::P1)
        throw std::invalid_argument(std::string(what) + ": level transfers are defined for P1");
    if (&coarse.domain() != &fine.domain())
        throw std::invalid_argument(std::string(what) + ": functions live on different domains");
    if (coarse_level < coarse.min_level() || coarse_level > coarse.max_level() ||
        coarse_level + 1 < fine.min_level() || coarse_level + 1 > fine.max_level())
        throw std::out_of_range(std::string(what) + ": level pair (" +
                                std::to_string(coarse_level) + ", " +
                                std::to_string(coarse_level + 1) +
                                ") outside the functions' level ranges");
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double vec_norm(const std::vector<double>& a) { return std::sqrt(vec_dot(a, a)); }

void check_system(const SparseMatrix& A, const std::vector<double>& rhs,
                  const std::vector<double>& x, const char* what) {
    if (A.rows() != A.cols())
        throw std::invalid_argument(std::string(what) + ": matrix is not square");
    if (rhs.size() != A.rows() || x.size() != A.rows())
        throw std::invalid_argument(std::string(what) + ": vector size does not match the matrix");
}

/// Replaces the last recorded residual with ||rhs - A*x|| of the returned
/// iterate and judges convergence on it.
void finish_report(SolveReport& rep, const SparseMatrix& A, const std::vector<double>& rhs,
                   const std::vector<double>& x, double target) {
    std::vector<double> t = A.multiply(x);
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = rhs[i] - t[i];
        s += d * d;
    }
    rep.residuals.back() = std::sqrt(s);
    rep.converged = rep.residuals.back() <= target;
}

} // namespace

// --- level transfers --------------------------------------------------------

void prolongate(Controller& c, const ScalarFunction& coarse, ScalarFunction& fine,
                int coarse_level, std::uint8_t flag_mask) {
    check_transfer(coarse, fine, coarse_level, "prolongate");
    sync_all(c, coarse, coarse_level);
    DistributedDomain& dom = fine.domain();
    const int fine_level = coarse_level + 1;
    const int nc = 1 << coarse_level;
    const int wc = nc + 1;
    const int wf = 2 * nc + 1;
    for (int r = 0; r < dom.ranks(); ++r)
        for (auto& [id, p] : dom.graph(r).local) {
            const auto& cv = field_values(std::as_const(p), coarse.handle(), coarse_level);
            auto& fv = field_values(p, fine.handle(), fine_level);
            const auto& ff = field_flags(std::as_const(p), fine.handle(), fine_level);
            switch (p.kind) {
            case PrimitiveKind::VERTEX:
                if (ff[0] & flag_mask)
                    fv[0] = cv[0];
                break;
            case PrimitiveKind::EDGE:
                // Even fine line indices coincide with coarse ones; odd ones
                // are segment midpoints. The coarse line's end copies (vertex
                // values) are fresh after the sync.
                for (int k = 1; k < 2 * nc; ++k) {
                    if (!(ff[k] & flag_mask))
                        continue;
                    fv[k] = (k % 2 == 0) ? cv[static_cast<std::size_t>(k / 2)]
                                         : 0.5 * (cv[static_cast<std::size_t>((k - 1) / 2)] +
                                                  cv[static_cast<std::size_t>((k + 1) / 2)]);
                }
                break;
            case PrimitiveKind::FACE: {
                const auto cval = [&](int col, int row) {
                    return cv[coarse.layout().index(wc, col, row)];
                };
                for (int row = 1; row < 2 * nc; ++row)
                    for (int col = 1; col + row <= 2 * nc - 1; ++col) {
                        const std::size_t slot = fine.layout().index(wf, col, row);
                        if (!(ff[slot] & flag_mask))
                            continue;
                        double v;
                        if (col % 2 == 0 && row % 2 == 0)
                            v = cval(col / 2, row / 2);
                        else if (row % 2 == 0)
                            v = 0.5 * (cval((col - 1) / 2, row / 2) + cval((col + 1) / 2, row / 2));
                        else if (col % 2 == 0)
                            v = 0.5 * (cval(col / 2, (row - 1) / 2) + cval(col / 2, (row + 1) / 2));
                        else
                            // midpoint of the diagonal micro-edge
                            // (c', r'+1) -- (c'+1, r')
                            v = 0.5 *
                                (cval((col + 1) / 2, (row - 1) / 2) + cval((col - 1) / 2, (row + 1) / 2));
                        fv[slot] = v;
                    }
                break;
            }
            }
        }
}

void restrict_to_coarse(Controller& c, const ScalarFunction& fine, ScalarFunction& coarse,
                        int coarse_level, std::uint8_t flag_mask) {
    check_transfer(coarse, fine, coarse_level, "restrict_to_coarse");
    const int fine_level = coarse_level + 1;
    sync_all(c, fine, fine_level);
    DistributedDomain& dom = fine.domain();
    const int nc = 1 << coarse_level;
    const int wc = nc + 1;
    const int wf = 2 * nc + 1;
    for (int r = 0; r < dom.ranks(); ++r)
        for (auto& [id, p] : dom.graph(r).local) {
            const auto& fv = field_values(std::as_const(p), fine.handle(), fine_level);
            auto& cv = field_values(p, coarse.handle(), coarse_level);
            const auto& cf = field_flags(std::as_const(p), coarse.handle(), coarse_level);
            switch (p.kind) {
            case PrimitiveKind::VERTEX: {
                // The incident coarse micro-edges are exactly the first
                // segments of the incident macro-edges (border diagonals
                // belong to the diagonal macro-edge), and their midpoints are
                // this vertex's fine edge ghosts.
                if (!(cf[0] & flag_mask))
                    break;
                const auto& vi = std::get<VertexInfo>(p.info);
                double acc = fv[0];
                for (std::size_t ei = 0; ei < vi.edges.size(); ++ei)
                    acc += 0.5 * fv[vertex_edge_ghost_offset(FunctionKind::P1, ei)];
                cv[0] = acc;
                break;
            }
            case PrimitiveKind::EDGE: {
                // Off-line midpoint neighbors of line DoF k sit at entries
                // 2k-1 and 2k of each face's first inner halo row; the
                // reversal of a non-aligned face cancels against the entry
                // order, so the positions hold in the edge's own direction.
                const auto& ei = std::get<EdgeInfo>(p.info);
                std::vector<std::size_t> halo;
                for (std::size_t f = 0; f < ei.faces.size(); ++f)
                    halo.push_back(edge_halo_offset(FunctionKind::P1, fine_level, ei, f) +
                                   edge_halo_row_offset(FunctionKind::P1, fine_level,
                                                        ei.faces[f].slot, DoFGroup::VERTEX, 1));
                for (int k = 1; k < nc; ++k) {
                    if (!(cf[k] & flag_mask))
                        continue;
                    double acc = fv[static_cast<std::size_t>(2 * k)] +
                                 0.5 * (fv[static_cast<std::size_t>(2 * k - 1)] +
                                        fv[static_cast<std::size_t>(2 * k + 1)]);
                    for (const std::size_t base : halo)
                        acc += 0.5 * (fv[base + static_cast<std::size_t>(2 * k - 1)] +
                                      fv[base + static_cast<std::size_t>(2 * k)]);
                    cv[static_cast<std::size_t>(k)] = acc;
                }
                break;
            }
            case PrimitiveKind::FACE: {
                const auto fval = [&](int col, int row) {
                    return fv[fine.layout().index(wf, col, row)];
                };
                for (int row = 1; row < nc; ++row)
                    for (int col = 1; col + row <= nc - 1; ++col) {
                        const std::size_t slot = coarse.layout().index(wc, col, row);
                        if (!(cf[slot] & flag_mask))
                            continue;
                        const int fc = 2 * col;
                        const int fr = 2 * row;
                        cv[slot] = fval(fc, fr) +
                                   0.5 * (fval(fc - 1, fr) + fval(fc + 1, fr) + fval(fc, fr - 1) +
                                          fval(fc, fr + 1) + fval(fc + 1, fr - 1) +
                                          fval(fc - 1, fr + 1));
                    }
                break;
            }
            }
        }
}

// --- Krylov solvers ----------------------------------------------------------

std::string SolveReport::history() const {
    std::string out;
    char line[96];
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        if (k == 0)
            std::snprintf(line, sizeof line, "cycle %zu residual %.6e\n", k, residuals[k]);
        else {
            const double f = residuals[k - 1] > 0.0 ? residuals[k] / residuals[k - 1] : 0.0;
            std::snprintf(line, sizeof line, "cycle %zu residual %.6e factor %.4f\n", k,
                          residuals[k], f);
        }
        out += line;
    }
    if (breakdown)
        out += "breakdown\n";
    return out;
}

SolveReport cg_solve(const SparseMatrix& A, const std::vector<double>& rhs, std::vector<double>& x,
                     double tol, int max_iter) {
    check_system(A, rhs, x, "cg_solve");
    SolveReport rep;
    const double target = tol * vec_norm(rhs);
    std::vector<double> r = A.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = rhs[i] - r[i];
    std::vector<double> p = r;
    double rs = vec_dot(r, r);
    rep.residuals.push_back(std::sqrt(rs));
    while (rep.iterations < max_iter && rep.residuals.back() > target) {
        const std::vector<double> ap = A.multiply(p);
        const double pap = vec_dot(p, ap);
        if (pap <= 0.0) {
            rep.breakdown = true; // direction of non-positive curvature: not SPD
            break;
        }
        const double alpha = rs / pap;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rs_new = vec_dot(r, r);
        const double beta = rs_new / rs;
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = r[i] + beta * p[i];
        rs = rs_new;
        ++rep.iterations;
        rep.residuals.push_back(std::sqrt(rs));
    }
    finish_report(rep, A, rhs, x, target);
    return rep;
}

SolveReport minres_solve(const SparseMatrix& A, const std::vector<double>& rhs,
                         std::vector<double>& x, double tol, int max_iter) {
    check_system(A, rhs, x, "minres_solve");
    SolveReport rep;
    const std::size_t n = rhs.size();
    const double target = tol * vec_norm(rhs);
    std::vector<double> v = A.multiply(x);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = rhs[i] - v[i];
    double beta = vec_norm(v);
    rep.residuals.push_back(beta);
    double eta = beta;
    double c_old = 1.0, c = 1.0, s_old = 0.0, s = 0.0;
    std::vector<double> v_old(n, 0.0), w(n, 0.0), w_old(n, 0.0);
    if (beta > 0.0)
        for (std::size_t i = 0; i < n; ++i)
            v[i] /= beta;
    while (rep.iterations < max_iter && rep.residuals.back() > target) {
        // Lanczos step
        std::vector<double> av = A.multiply(v);
        const double alpha = vec_dot(v, av);
        for (std::size_t i = 0; i < n; ++i)
            av[i] -= alpha * v[i] + beta * v_old[i];
        const double beta_new = vec_norm(av);
        // Givens QR of the tridiagonal column
        const double rho1 = c * alpha - c_old * s * beta;
        const double rho2 = s * alpha + c_old * c * beta;
        const double rho3 = s_old * beta;
        const double delta = std::hypot(rho1, beta_new);
        if (delta == 0.0) {
            rep.breakdown = true;
            break;
        }
        const double c_new = rho1 / delta;
        const double s_new = beta_new / delta;
        for (std::size_t i = 0; i < n; ++i) {
            const double wn = (v[i] - rho2 * w[i] - rho3 * w_old[i]) / delta;
            w_old[i] = w[i];
            w[i] = wn;
            x[i] += c_new * eta * wn;
        }
        eta = -s_new * eta;
        ++rep.iterations;
        rep.residuals.push_back(std::abs(eta));
        if (beta_new == 0.0)
            break; // Krylov space exhausted: the iterate is exact
        for (std::size_t i = 0; i < n; ++i) {
            const double t = v[i];
            v[i] = av[i] / beta_new;
            v_old[i] = t;
        }
        c_old = c;
        c = c_new;
        s_old = s;
        s = s_new;
        beta = beta_new;
    }
    finish_report(rep, A, rhs, x, target);
    return rep;
}

void constrain_dirichlet(SparseMatrix& A, std::vector<double>& rhs,
                         const std::vector<std::uint8_t>& flags) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("constrain_dirichlet: matrix is not square");
    if (flags.size() != A.rows() || rhs.size() != A.rows())
        throw std::invalid_argument("constrain_dirichlet: flag/rhs size does not match the matrix");
    const auto dir = [&](std::size_t i) { return (flags[i] & kDirichletMask) != 0; };
    for (std::size_t r = 0; r < A.rows(); ++r) {
        if (dir(r)) {
            A.clear_row(r);
            A.set(r, r, 1.0);
            continue;
        }
        std::vector<std::pair<std::size_t, double>> keep;
        keep.reserve(A.row(r).size());
        bool touched = false;
        for (const auto& [col, val] : A.row(r)) {
            if (dir(col)) {
                rhs[r] -= val * rhs[col];
                touched = true;
            } else {
                keep.emplace_back(col, val);
            }
        }
        if (touched) {
            A.clear_row(r);
            for (const auto& [col, val] : keep)
                A.set(r, col, val);
        }
    }
}

// --- scalar multigrid --------------------------------------------------------

namespace {

SparseMatrix constrained_matrix(const StencilOperator& A, const GlobalDoFMap& map,
                                const std::vector<std::uint8_t>& flags) {
    SparseMatrix M = assemble_global_sparse(A, map.level(), map);
    std::vector<double> zero(M.rows(), 0.0);
    constrain_dirichlet(M, zero, flags);
    return M;
}

void check_hierarchy_levels(int min_level, int max_level, const char* what) {
    if (min_level < 1 || min_level > max_level)
        throw std::invalid_argument(std::string(what) + ": need 1 <= min_level <= max_level, got [" +
                                    std::to_string(min_level) + ", " + std::to_string(max_level) +
                                    "]");
}

void check_cycle_args(int level, int min_level, int max_level, int nu_pre, int nu_post,
                      const char* what) {
    if (level < min_level || level > max_level)
        throw std::out_of_range(std::string(what) + ": level " + std::to_string(level) +
                                " outside [" + std::to_string(min_level) + ", " +
                                std::to_string(max_level) + "]");
    if (nu_pre < 0 || nu_post < 0)
        throw std::invalid_argument(std::string(what) + ": negative smoothing count");
}

} // namespace

GridHierarchy::GridHierarchy(DistributedDomain& domain, Controller& c, Form form, int min_level,
                             int max_level, BoundaryConditions bc, TriangleLayout layout)
    : ctl_((check_hierarchy_levels(min_level, max_level, "GridHierarchy"), &c)),
      a_(domain, form, FunctionKind::P1, min_level, max_level, bc),
      r_("mg.r", domain, FunctionKind::P1, min_level, max_level, bc, layout),
      b_("mg.b", domain, FunctionKind::P1, min_level, max_level, bc, layout),
      e_("mg.e", domain, FunctionKind::P1, min_level, max_level, bc, layout),
      coarse_map_(domain, FunctionKind::P1, min_level, layout),
      coarse_flags_(coarse_map_.gather_flags(r_)),
      coarse_a_(constrained_matrix(a_, coarse_map_, coarse_flags_)) {
    register_function(c, r_);
    register_function(c, b_);
    register_function(c, e_);
}

void GridHierarchy::vcycle(const ScalarFunction& rhs, ScalarFunction& x, int level, int nu_pre,
                           int nu_post) {
    check_cycle_args(level, min_level(), max_level(), nu_pre, nu_post, "vcycle");
    cycle(rhs, x, level, nu_pre, nu_post);
}

void GridHierarchy::cycle(const ScalarFunction& rhs, ScalarFunction& x, int level, int nu_pre,
                          int nu_post) {
    // Boundary rows carry their data in rhs; enforcing them here makes the
    // residual vanish on DIRICHLET rows, so coarse corrections stay zero
    // there.
    assign(1.0, rhs, 0.0, rhs, x, level, kDirichletMask);
    if (level == min_level()) {
        coarse_correct(rhs, x);
        return;
    }
    for (int i = 0; i < nu_pre; ++i)
        smooth_gs(a_, *ctl_, rhs, x, level);
    apply(a_, *ctl_, x, r_, level);
    assign(1.0, rhs, -1.0, r_, r_, level);
    restrict_to_coarse(*ctl_, r_, b_, level - 1);
    interpolate(b_, zero_expr, level - 1, kDirichletMask);
    interpolate(e_, zero_expr, level - 1);
    cycle(b_, e_, level - 1, nu_pre, nu_post);
    prolongate(*ctl_, e_, r_, level - 1, kSmoothMask);
    add_scaled(x, 1.0, r_, level, kSmoothMask);
    for (int i = 0; i < nu_post; ++i)
        smooth_gs(a_, *ctl_, rhs, x, level);
}

void GridHierarchy::coarse_correct(const ScalarFunction& rhs, ScalarFunction& x) {
    const int lvl = min_level();
    apply(a_, *ctl_, x, r_, lvl);
    assign(1.0, rhs, -1.0, r_, r_, lvl);
    const std::vector<double> b = coarse_map_.gather(r_);
    std::vector<double> e(b.size(), 0.0);
    const SolveReport rep =
        cg_solve(coarse_a_, b, e, 1e-12, static_cast<int>(b.size()) + 100);
    if (!rep.converged)
        throw std::runtime_error("vcycle: coarse CG did not converge\n" + rep.history());
    coarse_map_.scatter(e, r_);
    add_scaled(x, 1.0, r_, lvl, kSmoothMask);
}

double GridHierarchy::residual_norm(const ScalarFunction& rhs, const ScalarFunction& x,
                                    int level) {
    apply(a_, *ctl_, x, r_, level);
    assign(1.0, rhs, -1.0, r_, r_, level);
    return norm2(r_, level);
}

SolveReport GridHierarchy::solve(const ScalarFunction& rhs, ScalarFunction& x, int level,
                                 double tol, int max_cycles, int nu_pre, int nu_post) {
    check_cycle_args(level, min_level(), max_level(), nu_pre, nu_post, "solve");
    SolveReport rep;
    rep.residuals.push_back(residual_norm(rhs, x, level));
    const double r0 = rep.residuals.front();
    const double target = r0 > 0.0 ? tol * r0 : tol;
    while (rep.iterations < max_cycles && rep.residuals.back() > target) {
        cycle(rhs, x, level, nu_pre, nu_post);
        ++rep.iterations;
        rep.residuals.push_back(residual_norm(rhs, x, level));
    }
    rep.converged = rep.residuals.back() <= target;
    return rep;
}

// --- Stokes ------------------------------------------------------------------

StokesState::StokesState(const std::string& name, DistributedDomain& domain, int min_level,
                         int max_level, const BoundaryConditions& bc_velocity,
                         const BoundaryConditions& bc_pressure, TriangleLayout layout)
    : u1(name + ".u1", domain, FunctionKind::P1, min_level, max_level, bc_velocity, layout),
      u2(name + ".u2", domain, FunctionKind::P1, min_level, max_level, bc_velocity, layout),
      p(name + ".p", domain, FunctionKind::P1, min_level, max_level, bc_pressure, layout) {}

void register_state(Controller& c, const StokesState& s) {
    register_function(c, s.u1);
    register_function(c, s.u2);
    register_function(c, s.p);
}

double stokes_dot(const StokesState& a, const StokesState& b, int level) {
    return dot(a.u1, b.u1, level) + dot(a.u2, b.u2, level) + dot(a.p, b.p, level);
}

StokesSystem::StokesSystem(DistributedDomain& domain, int min_level, int max_level,
                           BoundaryConditions bc_velocity, BoundaryConditions bc_pressure,
                           TriangleLayout layout)
    : a_(domain, Form::LAPLACE, FunctionKind::P1, min_level, max_level, bc_velocity),
      gx_(domain, Form::GRAD_X, FunctionKind::P1, min_level, max_level, bc_velocity),
      gy_(domain, Form::GRAD_Y, FunctionKind::P1, min_level, max_level, bc_velocity),
      bx_(domain, Form::DIV_X, FunctionKind::P1, min_level, max_level, bc_pressure),
      by_(domain, Form::DIV_Y, FunctionKind::P1, min_level, max_level, bc_pressure),
      c_(domain, Form::PSPG, FunctionKind::P1, min_level, max_level, bc_pressure),
      tmp_u_("stokes.tmp_u", domain, FunctionKind::P1, min_level, max_level, bc_velocity, layout),
      mom_rhs_("stokes.mom_rhs", domain, FunctionKind::P1, min_level, max_level, bc_velocity,
               layout),
      tmp_p_("stokes.tmp_p", domain, FunctionKind::P1, min_level, max_level, bc_pressure, layout),
      res_p_("stokes.res_p", domain, FunctionKind::P1, min_level, max_level, bc_pressure, layout),
      diag_c_("stokes.diag_c", domain, FunctionKind::P1, min_level, max_level, bc_pressure,
              layout) {
    for (int l = min_level; l <= max_level; ++l)
        diagonal(c_, diag_c_, l);
}

void uzawa_smooth(StokesSystem& S, Controller& c, const StokesState& rhs, StokesState& x,
                  int level, double omega) {
    // Momentum: one forward hybrid Gauss-Seidel sweep per component against
    // the current pressure gradient.
    apply(S.gx_, c, x.p, S.tmp_u_, level, kSmoothMask);
    assign(1.0, rhs.u1, -1.0, S.tmp_u_, S.mom_rhs_, level, kSmoothMask);
    assign(1.0, rhs.u1, 0.0, rhs.u1, S.mom_rhs_, level, kDirichletMask);
    smooth_gs(S.a_, c, S.mom_rhs_, x.u1, level);
    apply(S.gy_, c, x.p, S.tmp_u_, level, kSmoothMask);
    assign(1.0, rhs.u2, -1.0, S.tmp_u_, S.mom_rhs_, level, kSmoothMask);
    assign(1.0, rhs.u2, 0.0, rhs.u2, S.mom_rhs_, level, kDirichletMask);
    smooth_gs(S.a_, c, S.mom_rhs_, x.u2, level);
    // Pressure: damped pointwise correction by the continuity residual. The
    // pressure Schur complement C - B A^-1 B^T shares the (negative) sign of
    // C, so the pointwise preconditioner is diag C itself: the pressure moves
    // against the residual, scaled by the positive -diag C.
    apply(S.bx_, c, x.u1, S.tmp_p_, level, kSmoothMask);
    assign(1.0, rhs.p, -1.0, S.tmp_p_, S.res_p_, level, kSmoothMask);
    apply(S.by_, c, x.u2, S.tmp_p_, level, kSmoothMask);
    add_scaled(S.res_p_, -1.0, S.tmp_p_, level, kSmoothMask);
    apply(S.c_, c, x.p, S.tmp_p_, level, kSmoothMask);
    add_scaled(S.res_p_, -1.0, S.tmp_p_, level, kSmoothMask);
    DistributedDomain& dom = S.domain();
    for (int r = 0; r < dom.ranks(); ++r)
        for (auto& [id, prim] : dom.graph(r).local) {
            auto& pv = field_values(prim, x.p.handle(), level);
            const auto& rv = field_values(std::as_const(prim), S.res_p_.handle(), level);
            const auto& dv = field_values(std::as_const(prim), S.diag_c_.handle(), level);
            const auto& fl = field_flags(std::as_const(prim), x.p.handle(), level);
            for_each_owned(FunctionKind::P1, prim.kind, prim.info, level, x.p.layout(),
                           [&](std::size_t slot) {
                               if (!(fl[slot] & kSmoothMask))
                                   return;
                               const double d = dv[slot];
                               if (d == 0.0)
                                   throw std::runtime_error(
                                       "uzawa_smooth: zero stabilization diagonal");
                               pv[slot] += omega * rv[slot] / d;
                           });
        }
}

void stokes_residual(StokesSystem& S, Controller& c, const StokesState& rhs, const StokesState& x,
                     StokesState& r, int level) {
    apply(S.a_, c, x.u1, S.tmp_u_, level, kSmoothMask);
    assign(1.0, rhs.u1, -1.0, S.tmp_u_, r.u1, level, kSmoothMask);
    apply(S.gx_, c, x.p, S.tmp_u_, level, kSmoothMask);
    add_scaled(r.u1, -1.0, S.tmp_u_, level, kSmoothMask);
    assign(1.0, rhs.u1, -1.0, x.u1, r.u1, level, kDirichletMask);
    apply(S.a_, c, x.u2, S.tmp_u_, level, kSmoothMask);
    assign(1.0, rhs.u2, -1.0, S.tmp_u_, r.u2, level, kSmoothMask);
    apply(S.gy_, c, x.p, S.tmp_u_, level, kSmoothMask);
    add_scaled(r.u2, -1.0, S.tmp_u_, level, kSmoothMask);
    assign(1.0, rhs.u2, -1.0, x.u2, r.u2, level, kDirichletMask);
    apply(S.bx_, c, x.u1, S.tmp_p_, level, kSmoothMask);
    assign(1.0, rhs.p, -1.0, S.tmp_p_, r.p, level, kSmoothMask);
    apply(S.by_, c, x.u2, S.tmp_p_, level, kSmoothMask);
    add_scaled(r.p, -1.0, S.tmp_p_, level, kSmoothMask);
    apply(S.c_, c, x.p, S.tmp_p_, level, kSmoothMask);
    add_scaled(r.p, -1.0, S.tmp_p_, level, kSmoothMask);
    assign(1.0, rhs.p, -1.0, x.p, r.p, level, kDirichletMask);
}

SparseMatrix assemble_stokes_sparse(const StokesSystem& S, int level, const GlobalDoFMap& map,
                                    const std::vector<std::uint8_t>& flags_u,
                                    const std::vector<std::uint8_t>& flags_p) {
    const std::size_t n = map.size();
    if (flags_u.size() != n || flags_p.size() != n)
        throw std::invalid_argument("assemble_stokes_sparse: flag vector size mismatch");
    const SparseMatrix A = assemble_global_sparse(S.a(), level, map);
    const SparseMatrix Gx = assemble_global_sparse(S.gx(), level, map);
    const SparseMatrix Gy = assemble_global_sparse(S.gy(), level, map);
    const SparseMatrix Bx = assemble_global_sparse(S.bx(), level, map);
    const SparseMatrix By = assemble_global_sparse(S.by(), level, map);
    const SparseMatrix C = assemble_global_sparse(S.c(), level, map);
    SparseMatrix M(3 * n, 3 * n);
    const auto dir = [](const std::vector<std::uint8_t>& f, std::size_t i) {
        return (f[i] & kDirichletMask) != 0;
    };
    for (std::size_t r = 0; r < n; ++r) {
        if (dir(flags_u, r)) {
            M.set(r, r, 1.0);
            M.set(n + r, n + r, 1.0);
        } else {
            for (const auto& [col, v] : A.row(r)) {
                M.add(r, col, v);
                M.add(n + r, n + col, v);
            }
            for (const auto& [col, v] : Gx.row(r))
                M.add(r, 2 * n + col, v);
            for (const auto& [col, v] : Gy.row(r))
                M.add(n + r, 2 * n + col, v);
        }
        if (dir(flags_p, r)) {
            M.set(2 * n + r, 2 * n + r, 1.0);
        } else {
            for (const auto& [col, v] : Bx.row(r))
                M.add(2 * n + r, col, v);
            for (const auto& [col, v] : By.row(r))
                M.add(2 * n + r, n + col, v);
            for (const auto& [col, v] : C.row(r))
                M.add(2 * n + r, 2 * n + col, v);
        }
    }
    return M;
}

namespace {

SparseMatrix constrained_stokes_matrix(const StokesSystem& S, const GlobalDoFMap& map,
                                       const std::vector<std::uint8_t>& flags_u,
                                       const std::vector<std::uint8_t>& flags_p) {
    SparseMatrix M = assemble_stokes_sparse(S, map.level(), map, flags_u, flags_p);
    std::vector<double> zero(M.rows(), 0.0);
    std::vector<std::uint8_t> f3;
    f3.reserve(3 * flags_u.size());
    f3.insert(f3.end(), flags_u.begin(), flags_u.end());
    f3.insert(f3.end(), flags_u.begin(), flags_u.end());
    f3.insert(f3.end(), flags_p.begin(), flags_p.end());
    constrain_dirichlet(M, zero, f3);
    return M;
}

void subtract_mean(std::vector<double>& v, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t i = begin; i < end; ++i)
        s += v[i];
    const double m = s / static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i)
        v[i] -= m;
}

} // namespace

StokesMultigrid::StokesMultigrid(DistributedDomain& domain, Controller& c, int min_level,
                                 int max_level, BoundaryConditions bc_velocity,
                                 BoundaryConditions bc_pressure, bool project_pressure_mean,
                                 double omega, TriangleLayout layout)
    : ctl_((check_hierarchy_levels(min_level, max_level, "StokesMultigrid"), &c)),
      sys_(domain, min_level, max_level, bc_velocity, bc_pressure, layout),
      r_("stokes_mg.r", domain, min_level, max_level, bc_velocity, bc_pressure, layout),
      b_("stokes_mg.b", domain, min_level, max_level, bc_velocity, bc_pressure, layout),
      e_("stokes_mg.e", domain, min_level, max_level, bc_velocity, bc_pressure, layout),
      ones_("stokes_mg.ones", domain, FunctionKind::P1, min_level, max_level, bc_pressure, layout),
      omega_(omega),
      project_(project_pressure_mean),
      coarse_map_(domain, FunctionKind::P1, min_level, layout),
      coarse_flags_u_(coarse_map_.gather_flags(r_.u1)),
      coarse_flags_p_(coarse_map_.gather_flags(r_.p)),
      coarse_m_(constrained_stokes_matrix(sys_, coarse_map_, coarse_flags_u_, coarse_flags_p_)) {
    register_state(c, r_);
    register_state(c, b_);
    register_state(c, e_);
    for (int l = min_level; l <= max_level; ++l)
        interpolate(ones_, [](double, double) { return 1.0; }, l);
}

void StokesMultigrid::vcycle(const StokesState& rhs, StokesState& x, int level, int nu_pre,
                             int nu_post) {
    check_cycle_args(level, min_level(), max_level(), nu_pre, nu_post, "stokes vcycle");
    cycle(rhs, x, level, nu_pre, nu_post);
}

void StokesMultigrid::cycle(const StokesState& rhs, StokesState& x, int level, int nu_pre,
                            int nu_post) {
    assign(1.0, rhs.u1, 0.0, rhs.u1, x.u1, level, kDirichletMask);
    assign(1.0, rhs.u2, 0.0, rhs.u2, x.u2, level, kDirichletMask);
    assign(1.0, rhs.p, 0.0, rhs.p, x.p, level, kDirichletMask);
    if (level == min_level()) {
        coarse_correct(rhs, x);
        return;
    }
    for (int i = 0; i < nu_pre; ++i)
        uzawa_smooth(sys_, *ctl_, rhs, x, level, omega_);
    stokes_residual(sys_, *ctl_, rhs, x, r_, level);
    restrict_to_coarse(*ctl_, r_.u1, b_.u1, level - 1);
    restrict_to_coarse(*ctl_, r_.u2, b_.u2, level - 1);
    restrict_to_coarse(*ctl_, r_.p, b_.p, level - 1);
    interpolate(b_.u1, zero_expr, level - 1, kDirichletMask);
    interpolate(b_.u2, zero_expr, level - 1, kDirichletMask);
    interpolate(b_.p, zero_expr, level - 1, kDirichletMask);
    interpolate(e_.u1, zero_expr, level - 1);
    interpolate(e_.u2, zero_expr, level - 1);
    interpolate(e_.p, zero_expr, level - 1);
    cycle(b_, e_, level - 1, nu_pre, nu_post);
    prolongate(*ctl_, e_.u1, r_.u1, level - 1, kSmoothMask);
    prolongate(*ctl_, e_.u2, r_.u2, level - 1, kSmoothMask);
    prolongate(*ctl_, e_.p, r_.p, level - 1, kSmoothMask);
    add_scaled(x.u1, 1.0, r_.u1, level, kSmoothMask);
    add_scaled(x.u2, 1.0, r_.u2, level, kSmoothMask);
    add_scaled(x.p, 1.0, r_.p, level, kSmoothMask);
    for (int i = 0; i < nu_post; ++i)
        uzawa_smooth(sys_, *ctl_, rhs, x, level, omega_);
}

void StokesMultigrid::coarse_correct(const StokesState& rhs, StokesState& x) {
    const int lvl = min_level();
    stokes_residual(sys_, *ctl_, rhs, x, r_, lvl);
    const std::size_t n = coarse_map_.size();
    std::vector<double> b;
    b.reserve(3 * n);
    for (const ScalarFunction* f : {&r_.u1, &r_.u2, &r_.p}) {
        const std::vector<double> part = coarse_map_.gather(*f);
        b.insert(b.end(), part.begin(), part.end());
    }
    if (project_)
        subtract_mean(b, 2 * n, 3 * n);
    std::vector<double> e(3 * n, 0.0);
    const SolveReport rep =
        minres_solve(coarse_m_, b, e, 1e-12, static_cast<int>(3 * n) * 3 + 200);
    if (!rep.converged)
        throw std::runtime_error("stokes vcycle: coarse MINRES did not converge\n" + rep.history());
    if (project_)
        subtract_mean(e, 2 * n, 3 * n);
    coarse_map_.scatter(std::vector<double>(e.begin(), e.begin() + n), r_.u1);
    coarse_map_.scatter(std::vector<double>(e.begin() + n, e.begin() + 2 * n), r_.u2);
    coarse_map_.scatter(std::vector<double>(e.begin() + 2 * n, e.end()), r_.p);
    add_scaled(x.u1, 1.0, r_.u1, lvl, kSmoothMask);
    add_scaled(x.u2, 1.0, r_.u2, lvl, kSmoothMask);
    add_scaled(x.p, 1.0, r_.p, lvl, kSmoothMask);
}

double StokesMultigrid::residual_norm(const StokesState& rhs, const StokesState& x, int level) {
    stokes_residual(sys_, *ctl_, rhs, x, r_, level);
    return std::sqrt(stokes_dot(r_, r_, level));
}

double StokesMultigrid::pressure_mean(const ScalarFunction& p, int level) {
    return dot(p, ones_, level) / dot(ones_, ones_, level);
}

SolveReport StokesMultigrid::solve(const StokesState& rhs, StokesState& x, int level, double tol,
                                   int max_cycles, int nu_pre, int nu_post) {
    check_cycle_args(level, min_level(), max_level(), nu_pre, nu_post, "stokes solve");
    SolveReport rep;
    rep.residuals.push_back(residual_norm(rhs, x, level));
    const double r0 = rep.residuals.front();
    const double target = r0 > 0.0 ? tol * r0 : tol;
    while (rep.iterations < max_cycles && rep.residuals.back() > target) {
        cycle(rhs, x, level, nu_pre, nu_post);
        ++rep.iterations;
        rep.residuals.push_back(residual_norm(rhs, x, level));
    }
    rep.converged = rep.residuals.back() <= target;
    if (project_)
        add_scaled(x.p, -pressure_mean(x.p, level), ones_, level, kSmoothMask);
    return rep;
}

} // namespace hytegrid
