#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hytegrid/balancing.hpp"
#include "hytegrid/function.hpp"
#include "hytegrid/meshgen.hpp"
#include "hytegrid/numbering.hpp"
#include "hytegrid/operators.hpp"
#include "hytegrid/solvers.hpp"

using namespace hytegrid;

namespace {

const std::uint8_t kSmooth = flag_bit(DoFFlag::INNER) | flag_bit(DoFFlag::NEUMANN);
const std::uint8_t kDirichlet = flag_bit(DoFFlag::DIRICHLET);

struct Env {
    SetupGraph setup;
    DistributedDomain dom;

    Env(const std::string& mesh, int ranks)
        : setup(build_setup_graph(parse_mesh_string(mesh))),
          dom(setup, partition_round_robin(setup, ranks), ranks) {}
};

double probe(double x, double y) { return std::exp(0.3 * x - 0.2 * y) + 0.1 * x * y; }
double probe2(double x, double y) { return std::cos(1.3 * x) - 0.4 * y; }
double linear(double x, double y) { return 1.5 + 2.0 * x - 0.75 * y; }
double zero(double, double) { return 0.0; }
double poiseuille(double, double y) { return 4.0 * y * (1.0 - y); }

BoundaryConditions all_neumann() {
    BoundaryConditions bc;
    bc.marker_flag[1] = DoFFlag::NEUMANN;
    bc.marker_flag[2] = DoFFlag::NEUMANN;
    bc.marker_flag[3] = DoFFlag::NEUMANN;
    return bc;
}

BoundaryConditions channel_velocity_bc() {
    BoundaryConditions bc;
    bc.marker_flag[1] = DoFFlag::DIRICHLET;
    bc.marker_flag[2] = DoFFlag::DIRICHLET;
    bc.marker_flag[3] = DoFFlag::NEUMANN;
    return bc;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Gaussian elimination with partial pivoting; the reference the iterative
/// solvers are checked against.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k]))
                piv = i;
        if (a[piv][k] == 0.0)
            throw std::runtime_error("dense_solve: singular matrix");
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0)
                continue;
            for (std::size_t j = k; j < n; ++j)
                a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j)
            s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<std::vector<double>> to_dense(const SparseMatrix& m) {
    std::vector<std::vector<double>> d(m.rows(), std::vector<double>(m.cols(), 0.0));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (const auto& [c, v] : m.row(r))
            d[r][c] = v;
    return d;
}

/// A P1 function pair on consecutive levels plus the flat numberings needed
/// to express the level transfers as explicit matrices.
struct TransferRig {
    ScalarFunction coarse, fine;
    GlobalDoFMap cmap, fmap;

    TransferRig(Env& env, Controller& ctl, int lc, BoundaryConditions bc = {})
        : coarse("rig.c", env.dom, FunctionKind::P1, lc, lc, bc),
          fine("rig.f", env.dom, FunctionKind::P1, lc + 1, lc + 1, bc),
          cmap(env.dom, FunctionKind::P1, lc),
          fmap(env.dom, FunctionKind::P1, lc + 1) {
        register_function(ctl, coarse);
        register_function(ctl, fine);
    }
};

/// Interpolation operator columns, one prolongated unit vector at a time.
std::vector<std::vector<double>> prolongation_matrix(Controller& ctl, TransferRig& rig, int lc) {
    const std::size_t nc = rig.cmap.size();
    const std::size_t nf = rig.fmap.size();
    std::vector<std::vector<double>> p(nf, std::vector<double>(nc, 0.0));
    for (std::size_t j = 0; j < nc; ++j) {
        std::vector<double> e(nc, 0.0);
        e[j] = 1.0;
        rig.cmap.scatter(e, rig.coarse);
        prolongate(ctl, rig.coarse, rig.fine, lc);
        const std::vector<double> col = rig.fmap.gather(rig.fine);
        for (std::size_t i = 0; i < nf; ++i)
            p[i][j] = col[i];
    }
    return p;
}

/// Restriction operator, one restricted fine unit vector (= one column, i.e.
/// one row of the transpose) at a time.
std::vector<std::vector<double>> restriction_matrix(Controller& ctl, TransferRig& rig, int lc) {
    const std::size_t nc = rig.cmap.size();
    const std::size_t nf = rig.fmap.size();
    std::vector<std::vector<double>> r(nc, std::vector<double>(nf, 0.0));
    for (std::size_t i = 0; i < nf; ++i) {
        std::vector<double> e(nf, 0.0);
        e[i] = 1.0;
        rig.fmap.scatter(e, rig.fine);
        restrict_to_coarse(ctl, rig.fine, rig.coarse, lc);
        const std::vector<double> col = rig.cmap.gather(rig.coarse);
        for (std::size_t j = 0; j < nc; ++j)
            r[j][i] = col[j];
    }
    return r;
}

} // namespace

// --- level transfers ---------------------------------------------------------

TEST_CASE("prolongation reproduces linear functions exactly") {
    for (const auto& [name, mesh] :
         {std::pair<const char*, std::string>{"square_reversed", meshgen::unit_square_reversed()},
          {"ring8", meshgen::square_ring8()}})
        for (int lc : {1, 2}) {
            CAPTURE(name);
            CAPTURE(lc);
            Env env(mesh, 2);
            Controller ctl(env.dom);
            TransferRig rig(env, ctl, lc);
            interpolate(rig.coarse, linear, lc);
            prolongate(ctl, rig.coarse, rig.fine, lc);
            ScalarFunction ref("ref", env.dom, FunctionKind::P1, lc + 1, lc + 1);
            interpolate(ref, linear, lc + 1);
            CHECK(max_abs_diff(rig.fmap.gather(rig.fine), rig.fmap.gather(ref)) <= 1e-13);
        }
}

TEST_CASE("every fine node interpolates from one parent or two midpoint parents") {
    // Rows of the interpolation matrix: a single 1.0 for fine nodes that
    // coincide with a coarse node, two 0.5 entries for micro-edge midpoints.
    for (const auto& [name, mesh] :
         {std::pair<const char*, std::string>{"square_reversed", meshgen::unit_square_reversed()},
          {"ring8", meshgen::square_ring8()}}) {
        CAPTURE(name);
        Env env(mesh, 2);
        Controller ctl(env.dom);
        TransferRig rig(env, ctl, 1);
        const auto p = prolongation_matrix(ctl, rig, 1);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CAPTURE(i);
            std::vector<double> nz;
            for (double v : p[i])
                if (v != 0.0)
                    nz.push_back(v);
            std::sort(nz.begin(), nz.end());
            const bool coincident = nz == std::vector<double>{1.0};
            const bool midpoint = nz == std::vector<double>{0.5, 0.5};
            CHECK((coincident || midpoint));
        }
    }
}

TEST_CASE("restriction is exactly the transpose of prolongation") {
    struct Case {
        const char* name;
        std::string mesh;
        int lc;
        int ranks;
    };
    const Case cases[] = {
        {"square_reversed L1", meshgen::unit_square_reversed(), 1, 1},
        {"square_reversed L2", meshgen::unit_square_reversed(), 2, 2},
        {"ring8 L1 serial", meshgen::square_ring8(), 1, 1},
        {"ring8 L1 split", meshgen::square_ring8(), 1, 3},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        Env env(c.mesh, c.ranks);
        Controller ctl(env.dom);
        TransferRig rig(env, ctl, c.lc);
        const auto p = prolongation_matrix(ctl, rig, c.lc);
        const auto r = restriction_matrix(ctl, rig, c.lc);
        REQUIRE(r.size() == rig.cmap.size());
        for (std::size_t j = 0; j < r.size(); ++j)
            for (std::size_t i = 0; i < r[j].size(); ++i) {
                CAPTURE(i);
                CAPTURE(j);
                CHECK(r[j][i] == p[i][j]);
            }
    }
}

TEST_CASE("coarse stencils equal the Galerkin triple product of the fine ones") {
    // With nested P1 spaces the re-discretized coarse operator and
    // R * A_fine * P agree entry by entry, for the stiffness and the mass
    // form alike; this ties the transfers and the stencil assembly to the
    // same pair of finite element spaces.
    for (const auto& [name, mesh] :
         {std::pair<const char*, std::string>{"square_reversed", meshgen::unit_square_reversed()},
          {"ring8", meshgen::square_ring8()}})
        for (Form form : {Form::LAPLACE, Form::MASS}) {
            CAPTURE(name);
            CAPTURE(to_string(form));
            const int lc = 1;
            Env env(mesh, 2);
            Controller ctl(env.dom);
            TransferRig rig(env, ctl, lc, all_neumann());
            StencilOperator op(env.dom, form, FunctionKind::P1, lc, lc + 1, all_neumann());
            const SparseMatrix ac = assemble_global_sparse(op, lc, rig.cmap);
            const SparseMatrix af = assemble_global_sparse(op, lc + 1, rig.fmap);
            const auto p = prolongation_matrix(ctl, rig, lc);
            const std::size_t nc = rig.cmap.size();
            const std::size_t nf = rig.fmap.size();
            // ap = A_fine * P, column by column
            std::vector<std::vector<double>> ap(nc);
            for (std::size_t j = 0; j < nc; ++j) {
                std::vector<double> col(nf);
                for (std::size_t i = 0; i < nf; ++i)
                    col[i] = p[i][j];
                ap[j] = af.multiply(col);
            }
            double worst = 0;
            for (std::size_t jr = 0; jr < nc; ++jr)
                for (std::size_t jc = 0; jc < nc; ++jc) {
                    double g = 0;
                    for (std::size_t i = 0; i < nf; ++i)
                        g += p[i][jr] * ap[jc][i];
                    worst = std::max(worst, std::abs(g - ac.coeff(jr, jc)));
                }
            CHECK(worst <= 1e-12);
        }
}

// --- Krylov solvers and boundary elimination ----------------------------------

TEST_CASE("constrain_dirichlet reduces constrained rows and lifts the right-hand side") {
    SparseMatrix a(4, 4);
    const double m[4][4] = {
        {2.0, -1.0, 0.0, 0.5},
        {-1.0, 3.0, -1.0, 0.0},
        {0.0, -1.0, 4.0, -2.0},
        {0.5, 0.0, -2.0, 5.0},
    };
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            if (m[r][c] != 0.0)
                a.set(r, c, m[r][c]);
    std::vector<double> rhs = {2.0, 5.0, 7.0, 3.0};
    const std::vector<std::uint8_t> flags = {kDirichlet, flag_bit(DoFFlag::INNER),
                                             flag_bit(DoFFlag::INNER), kDirichlet};
    constrain_dirichlet(a, rhs, flags);
    CHECK(a.coeff(0, 0) == 1.0);
    CHECK(a.coeff(0, 1) == 0.0);
    CHECK(a.coeff(3, 3) == 1.0);
    CHECK(a.coeff(3, 2) == 0.0);
    CHECK(a.coeff(1, 0) == 0.0);
    CHECK(a.coeff(1, 3) == 0.0);
    CHECK(a.coeff(2, 3) == 0.0);
    CHECK(a.coeff(1, 1) == 3.0);
    CHECK(a.coeff(1, 2) == -1.0);
    CHECK(a.coeff(2, 1) == -1.0); // symmetry survives the elimination
    CHECK(rhs[0] == 2.0);
    CHECK(rhs[3] == 3.0);
    CHECK(rhs[1] == doctest::Approx(5.0 - (-1.0) * 2.0 - 0.0 * 3.0).epsilon(1e-15));
    CHECK(rhs[2] == doctest::Approx(7.0 - (-2.0) * 3.0).epsilon(1e-15));
    // the reduced system solves like its dense counterpart, boundary values
    // pass through
    std::vector<double> x(4, 0.0);
    const SolveReport rep = cg_solve(a, rhs, x, 1e-14, 50);
    CHECK(rep.converged);
    const std::vector<double> ref = dense_solve(to_dense(a), rhs);
    CHECK(max_abs_diff(x, ref) <= 1e-12);
    CHECK(x[0] == 2.0);
    CHECK(x[3] == 3.0);
}

TEST_CASE("conjugate gradients solves the identity in one step") {
    SparseMatrix a(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        a.set(i, i, 1.0);
    const std::vector<double> rhs = {1.0, -2.0, 3.0, 0.25, -0.5};
    std::vector<double> x(5, 0.0);
    const SolveReport rep = cg_solve(a, rhs, x, 1e-12, 10);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(max_abs_diff(x, rhs) == 0.0);
}

TEST_CASE("conjugate gradients matches dense elimination on a constrained Poisson system") {
    Env env(meshgen::unit_square(), 2);
    const int level = 3;
    Controller ctl(env.dom);
    StencilOperator op(env.dom, Form::LAPLACE, FunctionKind::P1, level, level);
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    ScalarFunction f("f", env.dom, FunctionKind::P1, level, level);
    ScalarFunction mf("mf", env.dom, FunctionKind::P1, level, level);
    register_function(ctl, f);
    register_function(ctl, mf);
    interpolate(f, probe, level);
    StencilOperator mass(env.dom, Form::MASS, FunctionKind::P1, level, level);
    apply(mass, ctl, f, mf, level);
    SparseMatrix a = assemble_global_sparse(op, level, map);
    std::vector<double> rhs = map.gather(mf);
    constrain_dirichlet(a, rhs, map.gather_flags(f));
    const std::vector<double> ref = dense_solve(to_dense(a), rhs);
    std::vector<double> x(rhs.size(), 0.0);
    const SolveReport rep = cg_solve(a, rhs, x, 1e-12, 500);
    CHECK(rep.converged);
    CHECK(max_abs_diff(x, ref) <= 1e-8);
}

TEST_CASE("conjugate gradients reports breakdown on an indefinite matrix") {
    SparseMatrix a(2, 2);
    a.set(0, 0, 1.0);
    a.set(1, 1, -1.0);
    const std::vector<double> rhs = {1.0, 1.0};
    std::vector<double> x(2, 0.0);
    const SolveReport rep = cg_solve(a, rhs, x, 1e-12, 10);
    CHECK(rep.breakdown);
    CHECK_FALSE(rep.converged);
}

TEST_CASE("minres solves symmetric indefinite systems") {
    SparseMatrix a(3, 3);
    a.set(0, 0, 2.0);
    a.set(1, 1, -3.0);
    a.set(2, 2, 1.0);
    a.set(0, 1, 0.5);
    a.set(1, 0, 0.5);
    const std::vector<double> rhs = {1.0, 2.0, -1.0};
    std::vector<double> x(3, 0.0);
    const SolveReport rep = minres_solve(a, rhs, x, 1e-12, 50);
    CHECK(rep.converged);
    const std::vector<double> ref = dense_solve(to_dense(a), rhs);
    CHECK(max_abs_diff(x, ref) <= 1e-10);
    // the recorded final residual is the true one
    REQUIRE(!rep.residuals.empty());
    std::vector<double> ax = a.multiply(x);
    double s = 0;
    for (std::size_t i = 0; i < 3; ++i)
        s += (rhs[i] - ax[i]) * (rhs[i] - ax[i]);
    CHECK(rep.residuals.back() == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
}

TEST_CASE("solve report history names every cycle") {
    SolveReport rep;
    rep.residuals = {1.0, 0.25, 0.05};
    const std::string h = rep.history();
    CHECK(h.find("cycle 0 residual 1.000000e+00") != std::string::npos);
    CHECK(h.find("cycle 1 residual 2.500000e-01 factor 0.2500") != std::string::npos);
    CHECK(h.find("cycle 2 residual 5.000000e-02 factor 0.2000") != std::string::npos);
}

// --- scalar multigrid ----------------------------------------------------------

TEST_CASE("vcycle keeps the zero solution of the homogeneous problem exactly") {
    Env env(meshgen::square_ring8(), 2);
    Controller ctl(env.dom);
    GridHierarchy mg(env.dom, ctl, Form::LAPLACE, 1, 2);
    ScalarFunction rhs("rhs", env.dom, FunctionKind::P1, 1, 2);
    ScalarFunction x("x", env.dom, FunctionKind::P1, 1, 2);
    register_function(ctl, rhs);
    register_function(ctl, x);
    interpolate(rhs, zero, 2);
    interpolate(x, zero, 2);
    mg.vcycle(rhs, x, 2);
    CHECK(max_abs(x, 2) == 0.0);
}

TEST_CASE("vcycle solve reproduces the discrete harmonic extension of linear boundary data") {
    // A globally linear field annihilates every interior stiffness row, so
    // the exact discrete solution for linear Dirichlet data is the linear
    // interpolant itself; the solver has to hit it to solver tolerance.
    Env env(meshgen::unit_square(), 3);
    const int level = 3;
    Controller ctl(env.dom);
    GridHierarchy mg(env.dom, ctl, Form::LAPLACE, 1, level);
    ScalarFunction rhs("rhs", env.dom, FunctionKind::P1, 1, level);
    ScalarFunction x("x", env.dom, FunctionKind::P1, 1, level);
    ScalarFunction ref("ref", env.dom, FunctionKind::P1, 1, level);
    register_function(ctl, rhs);
    register_function(ctl, x);
    interpolate(rhs, zero, level);
    interpolate(rhs, linear, level, kDirichlet);
    interpolate(x, zero, level);
    interpolate(ref, linear, level);
    const SolveReport rep = mg.solve(rhs, x, level, 1e-12, 20);
    CHECK(rep.converged);
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    CHECK(max_abs_diff(map.gather(x), map.gather(ref)) <= 1e-10);
}

TEST_CASE("V(2,2) cycles contract the Poisson residual by at least a factor five") {
    struct Case {
        const char* name;
        std::string mesh;
        int max_level;
        int ranks;
    };
    const Case cases[] = {
        {"unit_square to L5", meshgen::unit_square(), 5, 2},
        {"square_reversed to L4", meshgen::unit_square_reversed(), 4, 3},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        Env env(c.mesh, c.ranks);
        Controller ctl(env.dom);
        GridHierarchy mg(env.dom, ctl, Form::LAPLACE, 1, c.max_level);
        ScalarFunction rhs("rhs", env.dom, FunctionKind::P1, 1, c.max_level);
        ScalarFunction x("x", env.dom, FunctionKind::P1, 1, c.max_level);
        register_function(ctl, rhs);
        register_function(ctl, x);
        interpolate(rhs, zero, c.max_level);
        interpolate(x, zero, c.max_level);
        interpolate(x, probe, c.max_level, kSmooth);
        const SolveReport rep = mg.solve(rhs, x, c.max_level, 0.0, 10);
        REQUIRE(rep.iterations == 10);
        // asymptotic rate: geometric mean over the last five cycles
        const double rate = std::pow(rep.residuals[10] / rep.residuals[5], 1.0 / 5.0);
        CAPTURE(rep.history());
        CHECK(rate <= 0.2);
        CHECK(rep.residuals[10] > 0.0);
    }
}

TEST_CASE("one vcycle is bitwise partition invariant") {
    const int level = 3;
    std::vector<std::vector<double>> results;
    for (int ranks : {1, 2, 4}) {
        Env env(meshgen::square_ring8(), ranks);
        Controller ctl(env.dom);
        GridHierarchy mg(env.dom, ctl, Form::LAPLACE, 1, level);
        ScalarFunction rhs("rhs", env.dom, FunctionKind::P1, 1, level);
        ScalarFunction x("x", env.dom, FunctionKind::P1, 1, level);
        register_function(ctl, rhs);
        register_function(ctl, x);
        interpolate(rhs, probe, level);
        interpolate(x, probe2, level);
        mg.vcycle(rhs, x, level);
        GlobalDoFMap map(env.dom, FunctionKind::P1, level);
        results.push_back(map.gather(x));
    }
    REQUIRE(results.size() == 3);
    for (std::size_t i = 0; i < results[0].size(); ++i) {
        CAPTURE(i);
        CHECK(results[0][i] == results[1][i]);
        CHECK(results[0][i] == results[2][i]);
    }
}

// --- Stokes --------------------------------------------------------------------

namespace {

/// Channel right-hand side: no body force, Poiseuille inflow and no-slip
/// walls ride on the velocity DIRICHLET rows.
void fill_channel_rhs(StokesState& rhs, int level) {
    interpolate(rhs.u1, zero, level);
    interpolate(rhs.u1, poiseuille, level, kDirichlet);
    interpolate(rhs.u2, zero, level);
    interpolate(rhs.p, zero, level);
}

/// Monolithic assembled reference solution of the channel problem.
std::vector<double> channel_reference(StokesSystem& sys, const StokesState& rhs, int level,
                                      const GlobalDoFMap& map) {
    const std::vector<std::uint8_t> fu = map.gather_flags(rhs.u1);
    const std::vector<std::uint8_t> fp = map.gather_flags(rhs.p);
    SparseMatrix m = assemble_stokes_sparse(sys, level, map, fu, fp);
    std::vector<double> b = map.gather(rhs.u1);
    const std::vector<double> b2 = map.gather(rhs.u2);
    const std::vector<double> b3 = map.gather(rhs.p);
    b.insert(b.end(), b2.begin(), b2.end());
    b.insert(b.end(), b3.begin(), b3.end());
    std::vector<std::uint8_t> f3 = fu;
    f3.insert(f3.end(), fu.begin(), fu.end());
    f3.insert(f3.end(), fp.begin(), fp.end());
    constrain_dirichlet(m, b, f3);
    std::vector<double> z(b.size(), 0.0);
    const SolveReport rep = minres_solve(m, b, z, 1e-13, static_cast<int>(b.size()) * 10);
    REQUIRE(rep.converged);
    return z;
}

std::vector<double> gather_state(const GlobalDoFMap& map, const StokesState& s) {
    std::vector<double> v = map.gather(s.u1);
    const std::vector<double> v2 = map.gather(s.u2);
    const std::vector<double> v3 = map.gather(s.p);
    v.insert(v.end(), v2.begin(), v2.end());
    v.insert(v.end(), v3.begin(), v3.end());
    return v;
}

void scatter_state(const GlobalDoFMap& map, const std::vector<double>& v, StokesState& s) {
    const std::size_t n = map.size();
    REQUIRE(v.size() == 3 * n);
    map.scatter(std::vector<double>(v.begin(), v.begin() + n), s.u1);
    map.scatter(std::vector<double>(v.begin() + n, v.begin() + 2 * n), s.u2);
    map.scatter(std::vector<double>(v.begin() + 2 * n, v.end()), s.p);
}

} // namespace

TEST_CASE("the assembled monolithic Stokes system is solvable and symmetric") {
    Env env(meshgen::channel(2, 1), 2);
    const int level = 2;
    Controller ctl(env.dom);
    StokesSystem sys(env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState rhs("rhs", env.dom, level, level, channel_velocity_bc(), all_neumann());
    register_state(ctl, rhs);
    fill_channel_rhs(rhs, level);
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    const std::vector<std::uint8_t> fu = map.gather_flags(rhs.u1);
    const std::vector<std::uint8_t> fp = map.gather_flags(rhs.p);
    SparseMatrix m = assemble_stokes_sparse(sys, level, map, fu, fp);
    std::vector<double> b = gather_state(map, rhs);
    std::vector<std::uint8_t> f3 = fu;
    f3.insert(f3.end(), fu.begin(), fu.end());
    f3.insert(f3.end(), fp.begin(), fp.end());
    constrain_dirichlet(m, b, f3);
    double asym = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (const auto& [c, v] : m.row(r))
            asym = std::max(asym, std::abs(v - m.coeff(c, r)));
    CHECK(asym <= 1e-12);
    std::vector<double> z(b.size(), 0.0);
    const SolveReport rep = minres_solve(m, b, z, 1e-12, static_cast<int>(b.size()) * 10);
    CHECK(rep.converged);
    std::vector<double> mz = m.multiply(z);
    double rn = 0, bn = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        rn += (b[i] - mz[i]) * (b[i] - mz[i]);
        bn += b[i] * b[i];
    }
    CHECK(std::sqrt(rn) <= 1e-8 * std::sqrt(bn));
}

TEST_CASE("the exact discrete Stokes solution is a fixed point of the Uzawa sweep") {
    Env env(meshgen::channel(2, 1), 2);
    const int level = 2;
    Controller ctl(env.dom);
    StokesSystem sys(env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState rhs("rhs", env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState x("x", env.dom, level, level, channel_velocity_bc(), all_neumann());
    register_state(ctl, rhs);
    register_state(ctl, x);
    fill_channel_rhs(rhs, level);
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    const std::vector<double> z = channel_reference(sys, rhs, level, map);
    scatter_state(map, z, x);
    uzawa_smooth(sys, ctl, rhs, x, level);
    CHECK(max_abs_diff(gather_state(map, x), z) <= 1e-9);
}

TEST_CASE("uzawa sweeps contract the Stokes residual from a perturbed start") {
    Env env(meshgen::channel(2, 1), 1);
    const int level = 2;
    Controller ctl(env.dom);
    StokesSystem sys(env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState rhs("rhs", env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState x("x", env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState r("r", env.dom, level, level, channel_velocity_bc(), all_neumann());
    register_state(ctl, rhs);
    register_state(ctl, x);
    register_state(ctl, r);
    fill_channel_rhs(rhs, level);
    interpolate(x.u1, zero, level);
    interpolate(x.u1, poiseuille, level, kDirichlet);
    interpolate(x.u1, probe, level, kSmooth);
    interpolate(x.u2, zero, level);
    interpolate(x.u2, probe2, level, kSmooth);
    interpolate(x.p, probe, level);
    stokes_residual(sys, ctl, rhs, x, r, level);
    const double r0 = std::sqrt(stokes_dot(r, r, level));
    for (int k = 0; k < 20; ++k)
        uzawa_smooth(sys, ctl, rhs, x, level);
    stokes_residual(sys, ctl, rhs, x, r, level);
    const double r20 = std::sqrt(stokes_dot(r, r, level));
    CHECK(r20 <= 0.3 * r0);
}

TEST_CASE("with zero damping and zero pressure the Uzawa sweep is plain Gauss-Seidel") {
    Env env(meshgen::channel(2, 1), 2);
    const int level = 2;
    Controller ctl(env.dom);
    StokesSystem sys(env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState rhs("rhs", env.dom, level, level, channel_velocity_bc(), all_neumann());
    StokesState x("x", env.dom, level, level, channel_velocity_bc(), all_neumann());
    ScalarFunction u1c("u1c", env.dom, FunctionKind::P1, level, level, channel_velocity_bc());
    ScalarFunction u2c("u2c", env.dom, FunctionKind::P1, level, level, channel_velocity_bc());
    register_state(ctl, rhs);
    register_state(ctl, x);
    register_function(ctl, u1c);
    register_function(ctl, u2c);
    fill_channel_rhs(rhs, level);
    interpolate(x.u1, probe, level);
    interpolate(x.u2, probe2, level);
    interpolate(x.p, zero, level);
    assign(1.0, x.u1, 0.0, x.u1, u1c, level);
    assign(1.0, x.u2, 0.0, x.u2, u2c, level);
    uzawa_smooth(sys, ctl, rhs, x, level, 0.0);
    StencilOperator a(env.dom, Form::LAPLACE, FunctionKind::P1, level, level,
                      channel_velocity_bc());
    smooth_gs(a, ctl, rhs.u1, u1c, level);
    smooth_gs(a, ctl, rhs.u2, u2c, level);
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    CHECK(max_abs_diff(map.gather(x.u1), map.gather(u1c)) == 0.0);
    CHECK(max_abs_diff(map.gather(x.u2), map.gather(u2c)) == 0.0);
    CHECK(max_abs(x.p, level) == 0.0);
}

TEST_CASE("Stokes multigrid hits the assembled reference solution of the channel") {
    Env env(meshgen::channel(2, 1), 2);
    const int level = 2;
    Controller ctl(env.dom);
    StokesMultigrid mg(env.dom, ctl, 1, level, channel_velocity_bc(), all_neumann());
    StokesState rhs("rhs", env.dom, 1, level, channel_velocity_bc(), all_neumann());
    StokesState x("x", env.dom, 1, level, channel_velocity_bc(), all_neumann());
    register_state(ctl, rhs);
    register_state(ctl, x);
    fill_channel_rhs(rhs, level);
    interpolate(x.u1, zero, level);
    interpolate(x.u2, zero, level);
    interpolate(x.p, zero, level);
    const SolveReport rep = mg.solve(rhs, x, level, 1e-10, 30);
    CAPTURE(rep.history());
    CHECK(rep.converged);
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    const std::vector<double> ref = channel_reference(mg.system(), rhs, level, map);
    CHECK(max_abs_diff(gather_state(map, x), ref) <= 1e-8);
}

TEST_CASE("Stokes multigrid converges on a three-level channel") {
    Env env(meshgen::channel(2, 1), 2);
    const int level = 3;
    Controller ctl(env.dom);
    StokesMultigrid mg(env.dom, ctl, 1, level, channel_velocity_bc(), all_neumann());
    StokesState rhs("rhs", env.dom, 1, level, channel_velocity_bc(), all_neumann());
    StokesState x("x", env.dom, 1, level, channel_velocity_bc(), all_neumann());
    register_state(ctl, rhs);
    register_state(ctl, x);
    fill_channel_rhs(rhs, level);
    interpolate(x.u1, zero, level);
    interpolate(x.u2, zero, level);
    interpolate(x.p, zero, level);
    const SolveReport rep = mg.solve(rhs, x, level, 1e-6, 10);
    CAPTURE(rep.history());
    CHECK(rep.converged);
    CHECK(rep.iterations <= 10);
}

TEST_CASE("Stokes multigrid with mean projection solves the enclosed cavity") {
    // All-Dirichlet velocity leaves the pressure defined only up to a
    // constant; the projected variant must still converge and anchor the
    // pressure mean at zero.
    Env env(meshgen::unit_square(), 2);
    const int level = 3;
    Controller ctl(env.dom);
    StokesMultigrid mg(env.dom, ctl, 1, level, BoundaryConditions{}, all_neumann(), true);
    StokesState rhs("rhs", env.dom, 1, level, BoundaryConditions{}, all_neumann());
    StokesState x("x", env.dom, 1, level, BoundaryConditions{}, all_neumann());
    register_state(ctl, rhs);
    register_state(ctl, x);
    interpolate(rhs.u1, zero, level);
    interpolate(rhs.u1, probe, level, kSmooth);
    interpolate(rhs.u2, zero, level);
    interpolate(rhs.p, zero, level);
    interpolate(x.u1, zero, level);
    interpolate(x.u2, zero, level);
    interpolate(x.p, zero, level);
    const SolveReport rep = mg.solve(rhs, x, level, 1e-8, 20);
    CAPTURE(rep.history());
    CHECK(rep.converged);
    CHECK(std::abs(mg.pressure_mean(x.p, level)) <= 1e-9);
    // no-slip data passes through untouched
    GlobalDoFMap map(env.dom, FunctionKind::P1, level);
    const std::vector<double> u1 = map.gather(x.u1);
    const std::vector<std::uint8_t> fu = map.gather_flags(x.u1);
    for (std::size_t i = 0; i < u1.size(); ++i)
        if (fu[i] & kDirichlet)
            CHECK(u1[i] == 0.0);
}

TEST_CASE("Stokes vcycle is bitwise partition invariant") {
    const int level = 2;
    std::vector<std::vector<double>> results;
    for (int ranks : {1, 2, 4}) {
        Env env(meshgen::channel(2, 1), ranks);
        Controller ctl(env.dom);
        StokesMultigrid mg(env.dom, ctl, 1, level, channel_velocity_bc(), all_neumann());
        StokesState rhs("rhs", env.dom, 1, level, channel_velocity_bc(), all_neumann());
        StokesState x("x", env.dom, 1, level, channel_velocity_bc(), all_neumann());
        register_state(ctl, rhs);
        register_state(ctl, x);
        fill_channel_rhs(rhs, level);
        interpolate(x.u1, zero, level);
        interpolate(x.u2, zero, level);
        interpolate(x.p, probe2, level);
        mg.vcycle(rhs, x, level);
        GlobalDoFMap map(env.dom, FunctionKind::P1, level);
        results.push_back(gather_state(map, x));
    }
    REQUIRE(results.size() == 3);
    for (std::size_t i = 0; i < results[0].size(); ++i) {
        CAPTURE(i);
        CHECK(results[0][i] == results[1][i]);
        CHECK(results[0][i] == results[2][i]);
    }
}

// --- misuse -------------------------------------------------------------------

TEST_CASE("solver misuse is rejected with the specific exception") {
    Env env(meshgen::unit_square(), 1);
    Controller ctl(env.dom);
    CHECK_THROWS_AS(GridHierarchy(env.dom, ctl, Form::LAPLACE, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(GridHierarchy(env.dom, ctl, Form::LAPLACE, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(
        StokesMultigrid(env.dom, ctl, 0, 1, channel_velocity_bc(), all_neumann()),
        std::invalid_argument);

    GridHierarchy mg(env.dom, ctl, Form::LAPLACE, 1, 2);
    ScalarFunction rhs("rhs", env.dom, FunctionKind::P1, 1, 2);
    ScalarFunction x("x", env.dom, FunctionKind::P1, 1, 2);
    register_function(ctl, rhs);
    register_function(ctl, x);
    interpolate(rhs, zero, 2);
    interpolate(x, zero, 2);
    CHECK_THROWS_AS(mg.vcycle(rhs, x, 3), std::out_of_range);
    CHECK_THROWS_AS(mg.vcycle(rhs, x, 2, -1, 2), std::invalid_argument);
    CHECK_THROWS_AS(mg.solve(rhs, x, 0, 1e-6, 5), std::out_of_range);

    ScalarFunction q2("q2", env.dom, FunctionKind::P2, 1, 2);
    register_function(ctl, q2);
    CHECK_THROWS_AS(prolongate(ctl, q2, x, 1), std::invalid_argument);
    CHECK_THROWS_AS(restrict_to_coarse(ctl, q2, x, 1), std::invalid_argument);
    CHECK_THROWS_AS(prolongate(ctl, rhs, x, 2), std::out_of_range);

    Env other(meshgen::unit_triangle(), 1);
    ScalarFunction f_other("fo", other.dom, FunctionKind::P1, 1, 2);
    CHECK_THROWS_AS(prolongate(ctl, f_other, x, 1), std::invalid_argument);

    SparseMatrix rect(3, 2);
    std::vector<double> b3(3, 0.0);
    std::vector<double> x3(3, 0.0);
    CHECK_THROWS_AS(cg_solve(rect, b3, x3, 1e-6, 5), std::invalid_argument);
    SparseMatrix sq(3, 3);
    std::vector<double> b2(2, 0.0);
    CHECK_THROWS_AS(minres_solve(sq, b2, x3, 1e-6, 5), std::invalid_argument);
    std::vector<std::uint8_t> badflags(2, 0);
    CHECK_THROWS_AS(constrain_dirichlet(sq, b3, badflags), std::invalid_argument);
}
