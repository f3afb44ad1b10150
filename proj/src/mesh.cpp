#include "hytegrid/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hytegrid {

namespace {

// Strip comments and whitespace; returns false for blank lines.
bool significant_line(const std::string& raw, std::string& out) {
    const auto hash = raw.find('#');
    out = (hash == std::string::npos) ? raw : raw.substr(0, hash);
    return out.find_first_not_of(" \t\r\n") != std::string::npos;
}

} // namespace

UnstructuredMesh parse_mesh(std::istream& in) {
    UnstructuredMesh mesh;
    std::string raw, line;
    std::size_t lineno = 0;

    auto next_line = [&](const char* expecting) -> std::istringstream {
        while (std::getline(in, raw)) {
            ++lineno;
            if (significant_line(raw, line))
                return std::istringstream(line);
        }
        throw MeshParseError(lineno, std::string("unexpected end of input, expected ") + expecting);
    };

    long long nv = 0, nt = 0;
    {
        auto ls = next_line("header 'NV NT'");
        if (!(ls >> nv >> nt) || nv < 0 || nt < 0)
            throw MeshParseError(lineno, "header must be two non-negative integers 'NV NT'");
    }

    mesh.vertices.reserve(static_cast<std::size_t>(nv));
    for (long long i = 0; i < nv; ++i) {
        auto ls = next_line("vertex line 'x y marker'");
        MeshVertex v;
        if (!(ls >> v.pos.x >> v.pos.y >> v.marker))
            throw MeshParseError(lineno, "vertex line must be 'x y marker'");
        mesh.vertices.push_back(v);
    }

    std::set<std::array<int, 3>> seen;
    mesh.triangles.reserve(static_cast<std::size_t>(nt));
    for (long long i = 0; i < nt; ++i) {
        auto ls = next_line("triangle line 'v0 v1 v2 region'");
        MeshTriangle t;
        if (!(ls >> t.v[0] >> t.v[1] >> t.v[2] >> t.region))
            throw MeshParseError(lineno, "triangle line must be 'v0 v1 v2 region'");
        for (int vi : t.v)
            if (vi < 0 || vi >= nv)
                throw MeshParseError(lineno, "vertex index " + std::to_string(vi) + " out of range [0, " +
                                                 std::to_string(nv) + ")");
        if (t.v[0] == t.v[1] || t.v[1] == t.v[2] || t.v[0] == t.v[2])
            throw MeshParseError(lineno, "triangle references a vertex twice");

        const Vec2 a = mesh.vertices[static_cast<std::size_t>(t.v[0])].pos;
        const Vec2 b = mesh.vertices[static_cast<std::size_t>(t.v[1])].pos;
        const Vec2 c = mesh.vertices[static_cast<std::size_t>(t.v[2])].pos;
        const double area2 = cross(b - a, c - a);
        if (area2 == 0.0)
            throw MeshParseError(lineno, "degenerate (zero-area) triangle");
        if (area2 < 0.0)
            std::swap(t.v[1], t.v[2]); // canonicalize to counter-clockwise, keeping v0

        std::array<int, 3> key = t.v;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second)
            throw MeshParseError(lineno, "duplicate triangle (same vertex set)");
        mesh.triangles.push_back(t);
    }

    return mesh;
}

UnstructuredMesh parse_mesh_string(const std::string& text) {
    std::istringstream in(text);
    return parse_mesh(in);
}

UnstructuredMesh parse_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open mesh file: " + path);
    return parse_mesh(in);
}

SetupGraph build_setup_graph(const UnstructuredMesh& mesh) {
    SetupGraph g;
    const std::size_t nv = mesh.vertices.size();

    // Edges are identified by their sorted vertex-index pair; the map order
    // (lexicographic pairs) fixes edge IDs deterministically.
    std::map<std::pair<int, int>, std::vector<int>> edge_faces; // pair -> adjacent triangle indices
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti].v;
        const std::array<std::pair<int, int>, 3> pairs = {
            std::minmax(t[0], t[1]), std::minmax(t[0], t[2]), std::minmax(t[1], t[2])};
        for (const auto& p : pairs)
            edge_faces[p].push_back(static_cast<int>(ti));
    }

    const std::size_t ne = edge_faces.size();
    const std::size_t nf = mesh.triangles.size();
    g.num_vertices = nv;
    g.num_edges = ne;
    g.num_faces = nf;
    g.primitives.resize(nv + ne + nf);

    std::map<std::pair<int, int>, std::size_t> edge_index;
    {
        std::size_t i = 0;
        for (const auto& [pair, faces] : edge_faces) {
            if (faces.size() > 2)
                throw std::invalid_argument("non-manifold mesh: edge (" + std::to_string(pair.first) + "," +
                                            std::to_string(pair.second) + ") shared by " +
                                            std::to_string(faces.size()) + " triangles");
            edge_index[pair] = i++;
        }
    }

    auto vid = [&](int v) { return g.vertex_id(static_cast<std::size_t>(v)); };
    auto eid = [&](std::pair<int, int> p) { return g.edge_id(edge_index.at(p)); };

    // Slot -> (local corner pair, walk direction first->second).
    static constexpr int slot_corners[3][2] = {{0, 1}, {0, 2}, {1, 2}};

    // Faces.
    for (std::size_t ti = 0; ti < nf; ++ti) {
        const auto& t = mesh.triangles[ti];
        FaceInfo f;
        f.region = t.region;
        for (int k = 0; k < 3; ++k) {
            f.vertices[static_cast<std::size_t>(k)] = vid(t.v[static_cast<std::size_t>(k)]);
            f.coords[static_cast<std::size_t>(k)] = mesh.vertices[static_cast<std::size_t>(t.v[static_cast<std::size_t>(k)])].pos;
            f.vertex_markers[static_cast<std::size_t>(k)] =
                mesh.vertices[static_cast<std::size_t>(t.v[static_cast<std::size_t>(k)])].marker;
        }
        for (int s = 0; s < 3; ++s) {
            const int a = t.v[static_cast<std::size_t>(slot_corners[s][0])];
            const int b = t.v[static_cast<std::size_t>(slot_corners[s][1])];
            f.edges[static_cast<std::size_t>(s)] = eid(std::minmax(a, b));
            f.edge_aligned[static_cast<std::size_t>(s)] = a < b; // intrinsic direction = low -> high index
        }
        auto& p = g.primitives[g.face_id(ti).value];
        p.id = g.face_id(ti);
        p.kind = PrimitiveKind::FACE;
        p.info = std::move(f);
    }

    // Edges (markers derived below, after adjacency is known).
    for (const auto& [pair, faces] : edge_faces) {
        const PrimitiveID id = eid(pair);
        EdgeInfo e;
        e.vertices = {vid(pair.first), vid(pair.second)};
        e.coords = {mesh.vertices[static_cast<std::size_t>(pair.first)].pos,
                    mesh.vertices[static_cast<std::size_t>(pair.second)].pos};
        e.vertex_markers = {mesh.vertices[static_cast<std::size_t>(pair.first)].marker,
                            mesh.vertices[static_cast<std::size_t>(pair.second)].marker};
        const int ma = e.vertex_markers[0];
        const int mb = e.vertex_markers[1];
        // Boundary iff exactly one neighboring face and both endpoints are
        // flagged. Mixed endpoint flags happen at domain corners; the larger
        // flag wins (generators order flags so this picks the open side).
        e.marker = (faces.size() == 1 && ma != 0 && mb != 0) ? std::max(ma, mb) : 0;

        std::vector<int> sorted_faces = faces;
        std::sort(sorted_faces.begin(), sorted_faces.end()); // face IDs increase with triangle index
        for (int ti : sorted_faces) {
            const auto& finfo = std::get<FaceInfo>(g.primitives[g.face_id(static_cast<std::size_t>(ti)).value].info);
            FaceNeighborInfo ni;
            ni.id = g.face_id(static_cast<std::size_t>(ti));
            ni.corners = finfo.coords;
            ni.vertex_markers = finfo.vertex_markers;
            for (int s = 0; s < 3; ++s)
                if (finfo.edges[static_cast<std::size_t>(s)] == id) {
                    ni.slot = s;
                    ni.aligned = finfo.edge_aligned[static_cast<std::size_t>(s)];
                }
            e.faces.push_back(ni);
        }
        auto& p = g.primitives[id.value];
        p.id = id;
        p.kind = PrimitiveKind::EDGE;
        p.info = std::move(e);
    }

    // Fill the per-slot edge markers on faces and edge-neighbor infos, now
    // that every edge's derived marker exists.
    for (std::size_t ti = 0; ti < nf; ++ti) {
        auto& f = std::get<FaceInfo>(g.primitives[g.face_id(ti).value].info);
        for (int s = 0; s < 3; ++s)
            f.edge_markers[static_cast<std::size_t>(s)] =
                std::get<EdgeInfo>(g.primitives[f.edges[static_cast<std::size_t>(s)].value].info).marker;
    }
    for (std::size_t ei = 0; ei < ne; ++ei) {
        auto& e = std::get<EdgeInfo>(g.primitives[g.edge_id(ei).value].info);
        for (auto& ni : e.faces) {
            const auto& f = std::get<FaceInfo>(g.primitives[ni.id.value].info);
            ni.edge_markers = f.edge_markers;
        }
    }

    // Vertices.
    std::vector<VertexInfo> vinfos(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        vinfos[v].coord = mesh.vertices[v].pos;
        vinfos[v].marker = mesh.vertices[v].marker;
    }
    for (const auto& [pair, faces] : edge_faces) {
        const PrimitiveID id = eid(pair);
        const auto& e = std::get<EdgeInfo>(g.primitives[id.value].info);
        for (int end = 0; end < 2; ++end) {
            auto& vi = vinfos[e.vertices[static_cast<std::size_t>(end)].value];
            vi.edges.push_back(id);
            vi.edge_markers.push_back(e.marker);
            vi.edge_far_markers.push_back(e.vertex_markers[static_cast<std::size_t>(1 - end)]);
        }
    }
    for (std::size_t ti = 0; ti < nf; ++ti) {
        const auto& f = std::get<FaceInfo>(g.primitives[g.face_id(ti).value].info);
        // Flanking edge slots at each corner: corner 0 -> slots {0,1},
        // corner 1 -> slots {0,2}, corner 2 -> slots {1,2}.
        static constexpr int corner_slots[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (int k = 0; k < 3; ++k) {
            VertexFaceInfo fi;
            fi.id = g.face_id(ti);
            fi.corners = f.coords;
            fi.corner_idx = k;
            fi.flank_edges = {f.edges[static_cast<std::size_t>(corner_slots[k][0])],
                              f.edges[static_cast<std::size_t>(corner_slots[k][1])]};
            fi.edge_markers = f.edge_markers;
            vinfos[f.vertices[static_cast<std::size_t>(k)].value].faces.push_back(fi);
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        // Incident edges were appended in edge-ID order already; faces in face-ID order.
        auto& p = g.primitives[v];
        p.id = g.vertex_id(v);
        p.kind = PrimitiveKind::VERTEX;
        p.info = std::move(vinfos[v]);
    }

    // Communication graph edges: vertex--edge and edge--face pairs only.
    for (std::size_t ei = 0; ei < ne; ++ei) {
        const auto& e = std::get<EdgeInfo>(g.primitives[g.edge_id(ei).value].info);
        for (const auto& v : e.vertices)
            g.graph_edges.emplace_back(v, g.edge_id(ei));
        for (const auto& ni : e.faces)
            g.graph_edges.emplace_back(g.edge_id(ei), ni.id);
    }

    return g;
}

} // namespace hytegrid
