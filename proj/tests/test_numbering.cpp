#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "field_oracle.hpp"
#include "hytegrid/balancing.hpp"
#include "hytegrid/function.hpp"
#include "hytegrid/meshgen.hpp"
#include "hytegrid/numbering.hpp"
#include "hytegrid/sparse.hpp"

using namespace hytegrid;

namespace {

struct Env {
    SetupGraph setup;
    DistributedDomain dom;

    Env(const std::string& mesh, int ranks)
        : setup(build_setup_graph(parse_mesh_string(mesh))),
          dom(setup, partition_round_robin(setup, ranks), ranks) {}
};

double probe(double x, double y) { return std::exp(0.3 * x - 0.2 * y) + 0.1 * x; }

} // namespace

TEST_CASE("global numbering agrees with the canonical key oracle") {
    // Two storage slots mirror the same DoF iff they share a canonical key;
    // the numbering must map exactly the keyed slots, one index per key.
    for (const std::string& mesh :
         {meshgen::unit_triangle(), meshgen::unit_square_reversed(), meshgen::square_ring8()})
        for (FunctionKind kind : {FunctionKind::P1, FunctionKind::P2, FunctionKind::DG0})
            for (int level : {0, 1, 2})
                for (int ranks : {1, 3}) {
                    CAPTURE(to_string(kind));
                    CAPTURE(level);
                    CAPTURE(ranks);
                    Env env(mesh, ranks);
                    const GlobalDoFMap num(env.dom, kind, level);
                    std::map<std::string, std::set<std::size_t>> by_key;
                    for (int r = 0; r < ranks; ++r)
                        for (const auto& [id, p] : env.dom.graph(r).local) {
                            const auto keys = oracle::slot_keys(env.dom, p, kind, level);
                            for (std::size_t slot = 0; slot < keys.size(); ++slot) {
                                if (keys[slot].empty()) {
                                    CHECK_THROWS_AS(num.global_index(id, slot),
                                                    std::out_of_range);
                                    continue;
                                }
                                by_key[keys[slot]].insert(num.global_index(id, slot));
                            }
                        }
                    CHECK(by_key.size() == num.size());
                    std::set<std::size_t> all;
                    for (const auto& [key, indices] : by_key) {
                        CAPTURE(key);
                        CHECK(indices.size() == 1); // every mirror, one index
                        all.insert(*indices.begin());
                    }
                    CHECK(all.size() == num.size()); // distinct keys, distinct indices
                    if (!all.empty())
                        CHECK(*all.rbegin() == num.size() - 1); // contiguous range
                }
}

TEST_CASE("numbering size matches hand-counted unknowns") {
    struct Case {
        std::string mesh;
        FunctionKind kind;
        int level;
        std::size_t count;
    };
    const Case cases[] = {
        {meshgen::unit_triangle(), FunctionKind::P1, 2, 15},
        {meshgen::unit_square(), FunctionKind::P1, 2, 25},
        {meshgen::unit_square(), FunctionKind::P2, 2, 81},
        {meshgen::square_ring8(), FunctionKind::P1, 2, 80},
        {meshgen::square_ring8(), FunctionKind::P2, 2, 288},
        {meshgen::unit_square(), FunctionKind::DG0, 2, 32},
    };
    for (const auto& c : cases) {
        Env env(c.mesh, 2);
        CHECK(GlobalDoFMap(env.dom, c.kind, c.level).size() == c.count);
    }
}

TEST_CASE("location inverts global_index") {
    Env env(meshgen::square_ring8(), 3);
    const GlobalDoFMap num(env.dom, FunctionKind::P2, 2);
    for (std::size_t g = 0; g < num.size(); ++g) {
        const auto [id, slot] = num.location(g);
        CHECK(num.global_index(id, slot) == g);
    }
    CHECK_THROWS_AS(num.location(num.size()), std::out_of_range);
}

TEST_CASE("gather after scatter reproduces the vector bitwise") {
    for (FunctionKind kind : {FunctionKind::P1, FunctionKind::P2, FunctionKind::DG0}) {
        CAPTURE(to_string(kind));
        const int level = 2;
        Env env(meshgen::square_ring8(), 3);
        const GlobalDoFMap num(env.dom, kind, level);
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> x(num.size());
        for (double& v : x)
            v = dist(rng);
        ScalarFunction f("f", env.dom, kind, level, level);
        num.scatter(x, f);
        CHECK(num.gather(f) == x);
    }
}

TEST_CASE("numbering and gather are partition invariant") {
    for (FunctionKind kind : {FunctionKind::P1, FunctionKind::P2}) {
        CAPTURE(to_string(kind));
        const int level = 2;
        std::vector<std::vector<double>> gathered;
        for (int ranks : {1, 2, 4}) {
            Env env(meshgen::square_ring8(), ranks);
            const GlobalDoFMap num(env.dom, kind, level);
            ScalarFunction f("f", env.dom, kind, level, level);
            interpolate(f, probe, level);
            gathered.push_back(num.gather(f));
        }
        CHECK(gathered[1] == gathered[0]);
        CHECK(gathered[2] == gathered[0]);
    }
}

TEST_CASE("gather_flags classifies boundary and interior rows") {
    const int level = 2;
    Env env(meshgen::square_ring8(), 2);
    BoundaryConditions bc;
    bc.marker_flag[1] = DoFFlag::DIRICHLET;
    bc.marker_flag[2] = DoFFlag::NEUMANN;
    const GlobalDoFMap num(env.dom, FunctionKind::P1, level);
    ScalarFunction f("f", env.dom, FunctionKind::P1, level, level, bc);
    const auto flags = num.gather_flags(f);
    REQUIRE(flags.size() == num.size());
    std::size_t inner = 0, dir = 0, neu = 0;
    for (const std::uint8_t fl : flags) {
        inner += fl == flag_bit(DoFFlag::INNER);
        dir += fl == flag_bit(DoFFlag::DIRICHLET);
        neu += fl == flag_bit(DoFFlag::NEUMANN);
    }
    CHECK(inner + dir + neu == num.size());
    CHECK(inner > 0);
    CHECK(dir > 0);
    CHECK(neu > 0);
    // Flags seen through the numbering equal the flags stored on primitives.
    for (int r = 0; r < 2; ++r)
        for (const auto& [id, p] : env.dom.graph(r).local) {
            const auto& local = f.flags(id, level);
            for_each_owned(FunctionKind::P1, p.kind, p.info, level, f.layout(),
                           [&](std::size_t slot) {
                               CHECK(flags[num.global_index(id, slot)] == local[slot]);
                           });
        }
}

TEST_CASE("sparse matrix basics") {
    SparseMatrix M(3, 4);
    CHECK(M.rows() == 3);
    CHECK(M.cols() == 4);
    CHECK(M.nnz() == 0);
    CHECK(M.coeff(1, 2) == 0.0);
    M.add(1, 2, 0.5);
    M.add(1, 2, 0.25);
    CHECK(M.coeff(1, 2) == 0.75);
    M.set(1, 2, -2.0);
    CHECK(M.coeff(1, 2) == -2.0);
    M.set(0, 0, 1.0);
    M.set(2, 3, 3.0);
    CHECK(M.nnz() == 3);
    M.clear_row(1);
    CHECK(M.coeff(1, 2) == 0.0);
    CHECK(M.nnz() == 2);
    CHECK_THROWS_AS(M.add(3, 0, 1.0), std::out_of_range);
    CHECK_THROWS_AS(M.coeff(0, 4), std::out_of_range);
}

TEST_CASE("sparse multiply") {
    SparseMatrix M(2, 3);
    M.set(0, 0, 2.0);
    M.set(0, 2, -1.0);
    M.set(1, 1, 0.5);
    const std::vector<double> x = {1.0, 4.0, 3.0};
    CHECK(M.multiply(x) == std::vector<double>{-1.0, 2.0});
    CHECK_THROWS_AS(M.multiply(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("coordinate text export") {
    SparseMatrix M(2, 2);
    M.set(1, 0, -2.0);
    M.set(0, 0, 1.75);
    M.set(0, 1, 0.5);
    std::ostringstream out;
    M.write_coo(out);
    CHECK(out.str() == "0 0 1.75\n0 1 0.5\n1 0 -2\n");
}
