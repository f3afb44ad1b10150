#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hytegrid/numbering.hpp"
#include "hytegrid/operators.hpp"

namespace hytegrid {

// ---------------------------------------------------------------------------
// Level transfers (P1).
//
// The level-(l+1) lattice contains the level-l lattice as its even-index
// sublattice, so prolongation copies coinciding values and sets each odd
// (midpoint) value to the average of the two endpoints of its refinement
// edge; restriction is the exact transpose. Both run per primitive after one
// ghost sync of the source level: the fine neighbors of a coarse border DoF
// sit in halo rows the sync keeps current, so no extra communication rounds
// are needed and the result is independent of the partition.
// ---------------------------------------------------------------------------

/// fine(level coarse_level+1) := P * coarse(level coarse_level) on owned fine
/// DoFs whose flag is in flag_mask.
void prolongate(Controller& c, const ScalarFunction& coarse, ScalarFunction& fine,
                int coarse_level, std::uint8_t flag_mask = ALL_DOF_FLAGS);

/// coarse(level coarse_level) := P^T * fine(level coarse_level+1) on owned
/// coarse DoFs whose flag is in flag_mask; fine values are read unmasked, so
/// the pair is an exact adjoint under the full mask.
void restrict_to_coarse(Controller& c, const ScalarFunction& fine, ScalarFunction& coarse,
                        int coarse_level, std::uint8_t flag_mask = ALL_DOF_FLAGS);

// ---------------------------------------------------------------------------
// Krylov solvers on assembled coarse systems.
// ---------------------------------------------------------------------------

/// Result of an iterative solve. residuals[k] is the Euclidean residual norm
/// after k iterations (cycles); the last entry is always recomputed from the
/// returned iterate, so convergence is judged on the true residual.
struct SolveReport {
    bool converged = false;
    bool breakdown = false;
    int iterations = 0;
    std::vector<double> residuals;

    /// One "cycle <k> residual <norm> factor <reduction>" line per entry.
    std::string history() const;
};

/// Conjugate gradients for symmetric positive definite systems, stopping at
/// ||rhs - A*x||_2 <= tol*||rhs||_2. A direction of non-positive curvature
/// stops the iteration with breakdown set (the matrix is not SPD).
SolveReport cg_solve(const SparseMatrix& A, const std::vector<double>& rhs,
                     std::vector<double>& x, double tol, int max_iter);

/// MINRES for symmetric (possibly indefinite or singular-but-consistent)
/// systems; same stopping rule as cg_solve.
SolveReport minres_solve(const SparseMatrix& A, const std::vector<double>& rhs,
                         std::vector<double>& x, double tol, int max_iter);

/// Eliminates DIRICHLET-flagged unknowns symmetrically: their rows and
/// columns are reduced to the identity and the known values (taken from rhs,
/// which keeps them) are moved to the right-hand side of the remaining rows.
/// Turns the row-replaced assembled matrices into symmetric systems whose
/// solutions still carry the boundary values.
void constrain_dirichlet(SparseMatrix& A, std::vector<double>& rhs,
                         const std::vector<std::uint8_t>& flags);

// ---------------------------------------------------------------------------
// Geometric multigrid for scalar operators.
// ---------------------------------------------------------------------------

/// Nested-level solver for one P1 form: the stencil operator is re-discretized
/// on every level of [min_level, max_level], smoothing is hybrid forward
/// Gauss-Seidel, and the min_level system is solved by CG on the assembled
/// matrix (which caps min_level at 5). DIRICHLET rows of the iterate are set
/// from the matching rows of rhs when a cycle starts and are never smoothed,
/// so boundary data is passed through rhs. Functions handed to vcycle/solve
/// must be registered with the controller given here.
class GridHierarchy {
  public:
    GridHierarchy(DistributedDomain& domain, Controller& c, Form form, int min_level,
                  int max_level, BoundaryConditions bc = {},
                  TriangleLayout layout = TriangleLayout{});

    int min_level() const { return a_.min_level(); }
    int max_level() const { return a_.max_level(); }
    const StencilOperator& op() const { return a_; }

    /// One V(nu_pre, nu_post) cycle for A x = rhs at `level`, descending to
    /// min_level.
    void vcycle(const ScalarFunction& rhs, ScalarFunction& x, int level, int nu_pre = 2,
                int nu_post = 2);

    /// Cycles until ||rhs - A*x||_2 <= tol * (initial residual), at most
    /// max_cycles times.
    SolveReport solve(const ScalarFunction& rhs, ScalarFunction& x, int level, double tol,
                      int max_cycles, int nu_pre = 2, int nu_post = 2);

    double residual_norm(const ScalarFunction& rhs, const ScalarFunction& x, int level);

  private:
    void cycle(const ScalarFunction& rhs, ScalarFunction& x, int level, int nu_pre, int nu_post);
    void coarse_correct(const ScalarFunction& rhs, ScalarFunction& x);

    Controller* ctl_;
    StencilOperator a_;
    ScalarFunction r_, b_, e_;
    GlobalDoFMap coarse_map_;
    std::vector<std::uint8_t> coarse_flags_;
    SparseMatrix coarse_a_;
};

// ---------------------------------------------------------------------------
// P1-P1-PSPG Stokes.
// ---------------------------------------------------------------------------

/// The three scalar unknowns of the equal-order Stokes discretization; u1, u2
/// carry the velocity boundary conditions, p the pressure ones (pressure is
/// normally unconstrained, i.e. every marker mapped to NEUMANN).
struct StokesState {
    StokesState(const std::string& name, DistributedDomain& domain, int min_level, int max_level,
                const BoundaryConditions& bc_velocity, const BoundaryConditions& bc_pressure,
                TriangleLayout layout = TriangleLayout{});

    ScalarFunction u1, u2, p;
};

void register_state(Controller& c, const StokesState& s);

/// Sum of the three component dot products (bitwise partition invariant like
/// dot).
double stokes_dot(const StokesState& a, const StokesState& b, int level);

/// Monolithic operator blocks of the stabilized system
///   A u1        + Gx p = f1
///          A u2 + Gy p = f2
///   Bx u1 + By u2 + C p = g
/// with A the Laplacian per velocity component, G/B the pressure
/// gradient/velocity divergence pair (exact transposes), and C the PSPG
/// stabilization, symmetric negative semidefinite in this sign convention.
class StokesSystem {
  public:
    StokesSystem(DistributedDomain& domain, int min_level, int max_level,
                 BoundaryConditions bc_velocity, BoundaryConditions bc_pressure,
                 TriangleLayout layout = TriangleLayout{});

    DistributedDomain& domain() const { return a_.domain(); }
    int min_level() const { return a_.min_level(); }
    int max_level() const { return a_.max_level(); }
    const BoundaryConditions& bc_velocity() const { return a_.boundary_conditions(); }
    const BoundaryConditions& bc_pressure() const { return c_.boundary_conditions(); }

    const StencilOperator& a() const { return a_; }
    const StencilOperator& gx() const { return gx_; }
    const StencilOperator& gy() const { return gy_; }
    const StencilOperator& bx() const { return bx_; }
    const StencilOperator& by() const { return by_; }
    const StencilOperator& c() const { return c_; }

  private:
    friend void uzawa_smooth(StokesSystem&, Controller&, const StokesState&, StokesState&, int,
                             double);
    friend void stokes_residual(StokesSystem&, Controller&, const StokesState&, const StokesState&,
                                StokesState&, int);

    StencilOperator a_, gx_, gy_, bx_, by_, c_;
    ScalarFunction tmp_u_, mom_rhs_, tmp_p_, res_p_, diag_c_;
};

/// One inexact-Uzawa sweep: a forward hybrid Gauss-Seidel sweep per velocity
/// component with the current pressure gradient moved to the right-hand side,
/// then the pointwise damped pressure update
///   p += omega * (g - B u - C p) / diag C
/// where diag C is negative for the PSPG block, matching the sign of the
/// pressure Schur complement C - B A^-1 B^T the update relaxes. A zero
/// stabilization diagonal is a hard error. With omega = 0 the pressure is
/// untouched and the velocities see plain Gauss-Seidel.
void uzawa_smooth(StokesSystem& S, Controller& c, const StokesState& rhs, StokesState& x,
                  int level, double omega = 0.3);

/// r := rhs - S*x blockwise; DIRICHLET rows get rhs - x (zero once boundary
/// values are enforced in x).
void stokes_residual(StokesSystem& S, Controller& c, const StokesState& rhs,
                     const StokesState& x, StokesState& r, int level);

/// Monolithic matrix [[A,0,Gx],[0,A,Gy],[Bx,By,C]] over one P1 numbering used
/// for all three unknowns (block offsets 0, N, 2N). DIRICHLET velocity rows
/// become identity rows with no off-block entries; the matching columns are
/// left untouched, so run constrain_dirichlet afterwards to symmetrize and to
/// lift boundary data into the right-hand side.
SparseMatrix assemble_stokes_sparse(const StokesSystem& S, int level, const GlobalDoFMap& map,
                                    const std::vector<std::uint8_t>& flags_u,
                                    const std::vector<std::uint8_t>& flags_p);

/// Monolithic multigrid for the stabilized Stokes system: Uzawa-smoothed
/// V-cycles over the P1 transfer pair with a MINRES solve of the assembled
/// monolithic system on min_level. With project_pressure_mean (enclosed
/// flows, where constant pressure is a null mode) the coarse right-hand side
/// and correction have their pressure mean removed after each coarse solve,
/// and solve() anchors the final pressure to mean zero.
class StokesMultigrid {
  public:
    StokesMultigrid(DistributedDomain& domain, Controller& c, int min_level, int max_level,
                    BoundaryConditions bc_velocity, BoundaryConditions bc_pressure,
                    bool project_pressure_mean = false, double omega = 0.3,
                    TriangleLayout layout = TriangleLayout{});

    StokesSystem& system() { return sys_; }
    int min_level() const { return sys_.min_level(); }
    int max_level() const { return sys_.max_level(); }

    void vcycle(const StokesState& rhs, StokesState& x, int level, int nu_pre = 2,
                int nu_post = 2);
    SolveReport solve(const StokesState& rhs, StokesState& x, int level, double tol,
                      int max_cycles, int nu_pre = 2, int nu_post = 2);

    double residual_norm(const StokesState& rhs, const StokesState& x, int level);
    double pressure_mean(const ScalarFunction& p, int level);

  private:
    void cycle(const StokesState& rhs, StokesState& x, int level, int nu_pre, int nu_post);
    void coarse_correct(const StokesState& rhs, StokesState& x);

    Controller* ctl_;
    StokesSystem sys_;
    StokesState r_, b_, e_;
    ScalarFunction ones_;
    double omega_;
    bool project_;
    GlobalDoFMap coarse_map_;
    std::vector<std::uint8_t> coarse_flags_u_, coarse_flags_p_;
    SparseMatrix coarse_m_;
};

} // namespace hytegrid
