#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hytegrid/mesh.hpp"
#include "hytegrid/meshgen.hpp"

using namespace hytegrid;

namespace {

// Oracle: unique unordered vertex pairs over all triangles.
std::set<std::pair<int, int>> brute_force_edges(const UnstructuredMesh& m) {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : m.triangles) {
        edges.insert(std::minmax(t.v[0], t.v[1]));
        edges.insert(std::minmax(t.v[0], t.v[2]));
        edges.insert(std::minmax(t.v[1], t.v[2]));
    }
    return edges;
}

double doubled_area(const UnstructuredMesh& m, const MeshTriangle& t) {
    const Vec2 a = m.vertices[static_cast<std::size_t>(t.v[0])].pos;
    const Vec2 b = m.vertices[static_cast<std::size_t>(t.v[1])].pos;
    const Vec2 c = m.vertices[static_cast<std::size_t>(t.v[2])].pos;
    return cross(b - a, c - a);
}

// Canonical text rendering of a setup graph, used for determinism checks.
std::string digest(const SetupGraph& g) {
    std::ostringstream os;
    os.precision(17);
    os << g.num_vertices << "/" << g.num_edges << "/" << g.num_faces << "\n";
    for (const auto& p : g.primitives) {
        os << p.id << " " << to_string(p.kind) << ": ";
        if (p.kind == PrimitiveKind::VERTEX) {
            const auto& v = p.vertex();
            os << v.coord.x << "," << v.coord.y << " m" << v.marker << " e[";
            for (auto e : v.edges)
                os << e << " ";
            os << "] f[";
            for (const auto& f : v.faces)
                os << f.id << "@" << f.corner_idx << "(" << f.flank_edges[0] << "," << f.flank_edges[1] << ") ";
            os << "]";
        } else if (p.kind == PrimitiveKind::EDGE) {
            const auto& e = p.edge();
            os << e.vertices[0] << "-" << e.vertices[1] << " m" << e.marker << " f[";
            for (const auto& f : e.faces)
                os << f.id << "@" << f.slot << (f.aligned ? "+" : "-") << " ";
            os << "]";
        } else {
            const auto& f = p.face();
            os << f.vertices[0] << "," << f.vertices[1] << "," << f.vertices[2] << " e[";
            for (int s = 0; s < 3; ++s)
                os << f.edges[static_cast<std::size_t>(s)] << (f.edge_aligned[static_cast<std::size_t>(s)] ? "+" : "-")
                   << "m" << f.edge_markers[static_cast<std::size_t>(s)] << " ";
            os << "] r" << f.region;
        }
        os << "\n";
    }
    for (const auto& [a, b] : g.graph_edges)
        os << a << "--" << b << "\n";
    return os.str();
}

struct GraphCounts {
    std::size_t v, e, f;
};

SetupGraph graph_of(const std::string& text) { return build_setup_graph(parse_mesh_string(text)); }

} // namespace

TEST_CASE("parser reads the generated fixtures") {
    const auto m = parse_mesh_string(meshgen::unit_square());
    REQUIRE(m.vertices.size() == 4);
    REQUIRE(m.triangles.size() == 2);
    CHECK(m.vertices[2].pos == Vec2{1.0, 1.0});
    CHECK(m.vertices[2].marker == 1);
    CHECK(m.triangles[0].v == std::array<int, 3>{0, 1, 2});
    CHECK(m.triangles[1].v == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("parser canonicalizes clockwise triangles to counter-clockwise") {
    const auto m = parse_mesh_string("3 1\n0 0 0\n1 0 0\n0 1 0\n0 2 1 7\n");
    REQUIRE(m.triangles.size() == 1);
    CHECK(m.triangles[0].v == std::array<int, 3>{0, 1, 2}); // v0 kept, v1/v2 swapped
    CHECK(m.triangles[0].region == 7);
    for (const auto& fixture : {meshgen::unit_square(), meshgen::square_ring8(), meshgen::channel(3, 2),
                                meshgen::annulus(8, 2)}) {
        const auto mesh = parse_mesh_string(fixture);
        for (const auto& t : mesh.triangles)
            CHECK(doubled_area(mesh, t) > 0.0);
    }
}

TEST_CASE("parser skips comments and blank lines, tracking line numbers") {
    const auto m = parse_mesh_string("# header\n\n  3 1  # NV NT\n0 0 0\n1 0 0\n# mid comment\n0 1 0\n0 1 2 0\n");
    CHECK(m.vertices.size() == 3);
    CHECK(m.triangles.size() == 1);
}

TEST_CASE("parse errors carry the offending line number") {
    auto expect_error = [](const std::string& text, std::size_t line, const std::string& fragment) {
        try {
            (void)parse_mesh_string(text);
            FAIL_CHECK("expected MeshParseError for: " << fragment);
        } catch (const MeshParseError& err) {
            CHECK(err.line() == line);
            CHECK(std::string(err.what()).find(fragment) != std::string::npos);
        }
    };
    expect_error("x y\n", 1, "header");
    expect_error("-1 0\n", 1, "header");
    expect_error("3 1\n0 0 0\nbroken\n0 1 0\n0 1 2 0\n", 3, "vertex line");
    expect_error("3 1\n0 0 0\n1 0 0\n0 1 0\n0 1 5 0\n", 5, "out of range");
    expect_error("3 1\n0 0 0\n1 0 0\n0 1 0\n0 1 1 0\n", 5, "twice");
    expect_error("3 1\n0 0 0\n1 0 0\n2 0 0\n0 1 2 0\n", 5, "degenerate");
    expect_error("4 2\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 1 2 0\n2 1 0 0\n", 7, "duplicate");
    expect_error("3 1\n0 0 0\n1 0 0\n", 3, "unexpected end");
}

TEST_CASE("missing mesh file reports the path") {
    CHECK_THROWS_WITH_AS((void)parse_mesh_file("/nonexistent/mesh.txt"),
                         "cannot open mesh file: /nonexistent/mesh.txt", std::runtime_error);
}

TEST_CASE("setup graph: counts and Euler characteristic per fixture") {
    struct Fixture {
        std::string text;
        int euler; // V - E + F: 1 for a disk, 0 for a ring
    };
    const Fixture fixtures[] = {
        {meshgen::unit_triangle(), 1}, {meshgen::unit_square(), 1},  {meshgen::unit_square_reversed(), 1},
        {meshgen::channel(4, 2), 1},   {meshgen::square_ring8(), 0}, {meshgen::annulus(8, 2), 0},
    };
    for (const auto& fx : fixtures) {
        const auto mesh = parse_mesh_string(fx.text);
        const auto g = build_setup_graph(mesh);
        CHECK(g.num_vertices == mesh.vertices.size());
        CHECK(g.num_faces == mesh.triangles.size());
        CHECK(g.num_edges == brute_force_edges(mesh).size());
        const long long euler = static_cast<long long>(g.num_vertices) - static_cast<long long>(g.num_edges) +
                                static_cast<long long>(g.num_faces);
        CHECK(euler == fx.euler);
        CHECK(g.size() == g.num_vertices + g.num_edges + g.num_faces);
    }
    const auto ring = graph_of(meshgen::square_ring8());
    CHECK(ring.num_vertices == 8);
    CHECK(ring.num_edges == 16);
    CHECK(ring.num_faces == 8);
}

TEST_CASE("setup graph: dense IDs in kind blocks") {
    const auto g = graph_of(meshgen::square_ring8());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g.primitives[i].id.value == i);
        const PrimitiveKind expect = i < g.num_vertices                 ? PrimitiveKind::VERTEX
                                     : i < g.num_vertices + g.num_edges ? PrimitiveKind::EDGE
                                                                        : PrimitiveKind::FACE;
        CHECK(g.primitives[i].kind == expect);
    }
}

TEST_CASE("setup graph: communication edges connect adjacent dimensions only") {
    for (const auto& text : {meshgen::unit_square(), meshgen::square_ring8(), meshgen::channel(4, 2),
                             meshgen::annulus(8, 2)}) {
        const auto g = graph_of(text);
        std::size_t ve = 0, ef = 0;
        for (const auto& [a, b] : g.graph_edges) {
            const auto ka = g.kind_of(a);
            const auto kb = g.kind_of(b);
            const bool vertex_edge = ka == PrimitiveKind::VERTEX && kb == PrimitiveKind::EDGE;
            const bool edge_face = ka == PrimitiveKind::EDGE && kb == PrimitiveKind::FACE;
            CHECK((vertex_edge || edge_face));
            (vertex_edge ? ve : ef) += 1;
        }
        CHECK(ve == 2 * g.num_edges);
        CHECK(ef == 3 * g.num_faces); // every face has three edges
        CHECK(g.graph_edges.size() == ve + ef);
    }
}

TEST_CASE("setup graph: face slots name the expected corner pairs") {
    static constexpr int slot_corners[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& text : {meshgen::unit_square(), meshgen::square_ring8(), meshgen::annulus(6, 2)}) {
        const auto g = graph_of(text);
        for (std::size_t fi = 0; fi < g.num_faces; ++fi) {
            const auto& f = g.at(g.face_id(fi)).face();
            CHECK(cross(f.coords[1] - f.coords[0], f.coords[2] - f.coords[0]) > 0.0); // CCW
            for (int s = 0; s < 3; ++s) {
                const PrimitiveID a = f.vertices[static_cast<std::size_t>(slot_corners[s][0])];
                const PrimitiveID b = f.vertices[static_cast<std::size_t>(slot_corners[s][1])];
                const auto& e = g.at(f.edges[static_cast<std::size_t>(s)]).edge();
                CHECK(e.vertices == std::array<PrimitiveID, 2>{std::min(a, b), std::max(a, b)});
                // aligned == walk agrees with the low-ID -> high-ID intrinsic direction
                CHECK(f.edge_aligned[static_cast<std::size_t>(s)] == (a < b));
            }
        }
    }
}

TEST_CASE("setup graph: edge adjacency and derived boundary markers") {
    const auto g = graph_of(meshgen::square_ring8());
    std::size_t boundary_edges = 0;
    for (std::size_t ei = 0; ei < g.num_edges; ++ei) {
        const auto& e = g.at(g.edge_id(ei)).edge();
        REQUIRE(!e.faces.empty());
        REQUIRE(e.faces.size() <= 2);
        CHECK(e.vertices[0] < e.vertices[1]);
        CHECK(std::is_sorted(e.faces.begin(), e.faces.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; }));
        for (const auto& ni : e.faces) {
            const auto& f = g.at(ni.id).face();
            CHECK(f.edges[static_cast<std::size_t>(ni.slot)] == g.edge_id(ei));
            CHECK(f.edge_aligned[static_cast<std::size_t>(ni.slot)] == ni.aligned);
            CHECK(ni.corners == f.coords);
        }
        if (e.faces.size() == 1) {
            ++boundary_edges;
            // Ring fixture: each boundary loop has uniform markers, so the
            // edge inherits the shared value (outer = 1, inner = 2).
            CHECK(e.vertex_markers[0] == e.vertex_markers[1]);
            CHECK(e.marker == e.vertex_markers[0]);
            CHECK(e.marker != 0);
        } else {
            CHECK(e.marker == 0);
        }
    }
    CHECK(boundary_edges == 8); // 4 outer + 4 inner
}

TEST_CASE("channel markers: inflow wins over walls at shared boundary edges") {
    const auto g = graph_of(meshgen::channel(4, 2));
    std::size_t inflow = 0, walls = 0, outflow = 0;
    for (std::size_t ei = 0; ei < g.num_edges; ++ei) {
        const auto& e = g.at(g.edge_id(ei)).edge();
        if (e.faces.size() != 1)
            continue;
        if (e.marker == 1)
            ++inflow;
        else if (e.marker == 2)
            ++walls;
        else if (e.marker == 3)
            ++outflow;
    }
    CHECK(inflow == 2);  // left side, ny = 2 segments
    CHECK(outflow == 2); // right side
    CHECK(walls == 8);   // top and bottom, nx = 4 each
}

TEST_CASE("setup graph: vertex adjacency is sorted and flank edges touch the vertex") {
    for (const auto& text : {meshgen::unit_square(), meshgen::square_ring8()}) {
        const auto mesh = parse_mesh_string(text);
        const auto g = build_setup_graph(mesh);
        const auto pairs = brute_force_edges(mesh);
        for (std::size_t vi = 0; vi < g.num_vertices; ++vi) {
            const auto& v = g.at(g.vertex_id(vi)).vertex();
            const std::size_t degree = static_cast<std::size_t>(
                std::count_if(pairs.begin(), pairs.end(), [&](const auto& p) {
                    return p.first == static_cast<int>(vi) || p.second == static_cast<int>(vi);
                }));
            CHECK(v.edges.size() == degree);
            CHECK(v.edge_markers.size() == degree);
            CHECK(std::is_sorted(v.edges.begin(), v.edges.end()));
            CHECK(std::is_sorted(v.faces.begin(), v.faces.end(),
                                 [](const auto& a, const auto& b) { return a.id < b.id; }));
            for (const auto& fi : v.faces) {
                const auto& f = g.at(fi.id).face();
                CHECK(f.vertices[static_cast<std::size_t>(fi.corner_idx)] == g.vertex_id(vi));
                for (const auto& flank : fi.flank_edges) {
                    const auto& e = g.at(flank).edge();
                    CHECK((e.vertices[0] == g.vertex_id(vi) || e.vertices[1] == g.vertex_id(vi)));
                }
            }
        }
    }
}

TEST_CASE("reversed fixture flips exactly one adjacency orientation") {
    auto shared_edge_alignments = [](const SetupGraph& g) {
        std::vector<bool> out;
        for (std::size_t ei = 0; ei < g.num_edges; ++ei) {
            const auto& e = g.at(g.edge_id(ei)).edge();
            if (e.faces.size() == 2)
                for (const auto& ni : e.faces)
                    out.push_back(ni.aligned);
        }
        return out;
    };
    CHECK(shared_edge_alignments(graph_of(meshgen::unit_square())) == std::vector<bool>{true, true});
    CHECK(shared_edge_alignments(graph_of(meshgen::unit_square_reversed())) == std::vector<bool>{true, false});
}

TEST_CASE("setup graph construction is deterministic") {
    for (const auto& text : {meshgen::square_ring8(), meshgen::annulus(10, 3)}) {
        const auto a = digest(graph_of(text));
        const auto b = digest(graph_of(text));
        CHECK(a == b);
        CHECK(!a.empty());
    }
}

TEST_CASE("non-manifold meshes are rejected") {
    // Three triangles sharing edge {0,1}.
    const std::string text = "5 3\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n2 1 0\n0 1 2 0\n0 1 3 0\n0 1 4 0\n";
    CHECK_THROWS_AS((void)graph_of(text), std::invalid_argument);
}
