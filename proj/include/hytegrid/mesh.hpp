#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hytegrid/ids.hpp"

namespace hytegrid {

/// Parse failure; carries the 1-based line number of the offending input line.
class MeshParseError : public std::runtime_error {
  public:
    MeshParseError(std::size_t line, const std::string& what)
        : std::runtime_error("mesh parse error, line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

struct MeshVertex {
    Vec2 pos;
    int marker = 0; // 0 = interior, nonzero = boundary marker
};

struct MeshTriangle {
    std::array<int, 3> v{}; // counter-clockwise after parsing
    int region = 0;
};

/// Coarse ("macro") mesh as read from file.
///
/// File format (ASCII, `#` starts a comment, indices 0-based):
///   NV NT
///   x y marker          (NV lines)
///   v0 v1 v2 region     (NT lines)
struct UnstructuredMesh {
    std::vector<MeshVertex> vertices;
    std::vector<MeshTriangle> triangles;
};

UnstructuredMesh parse_mesh(std::istream& in);
UnstructuredMesh parse_mesh_string(const std::string& text);
UnstructuredMesh parse_mesh_file(const std::string& path);

// --------------------------------------------------------------------------
// Macro-primitive graph (setup phase, process-global).
//
// Border slot convention for a face with CCW corners (v0, v1, v2), which map
// to topological lattice corners (0,0), (n,0), (0,n):
//   slot 0 = bottom   = v0--v1 (opposite local vertex 2), walk v0 -> v1
//   slot 1 = left     = v0--v2 (opposite local vertex 1), walk v0 -> v2
//   slot 2 = diagonal = v1--v2 (opposite local vertex 0), walk v1 -> v2
// An edge's intrinsic direction runs from its lower-ID endpoint to its
// higher-ID endpoint; `aligned` says the intrinsic direction equals the walk.
// --------------------------------------------------------------------------

/// What a macro-edge stores about one neighboring face. Enough geometry and
/// orientation metadata to assemble edge stencils and exchange halos without
/// any access to the face's rank.
struct FaceNeighborInfo {
    PrimitiveID id;
    std::array<Vec2, 3> corners{};
    int slot = 0;        // border slot of the face occupied by this edge
    bool aligned = true; // edge intrinsic direction == face walk direction
    std::array<int, 3> edge_markers{};   // face's edge markers, by slot
    std::array<int, 3> vertex_markers{}; // face's corner markers, by local index
};

/// What a macro-vertex stores about one incident face.
struct VertexFaceInfo {
    PrimitiveID id;
    std::array<Vec2, 3> corners{};
    int corner_idx = 0;                      // which local corner of the face is this vertex
    std::array<PrimitiveID, 2> flank_edges{}; // the face's two edges meeting at that corner
    std::array<int, 3> edge_markers{};        // face's edge markers, by slot
};

struct VertexInfo {
    Vec2 coord{};
    int marker = 0;
    std::vector<PrimitiveID> edges;       // incident edges, ID-sorted
    std::vector<int> edge_markers;        // parallel to `edges`
    std::vector<int> edge_far_markers;    // marker of each edge's opposite endpoint
    std::vector<VertexFaceInfo> faces;    // incident faces, ID-sorted
};

struct EdgeInfo {
    std::array<PrimitiveID, 2> vertices{}; // line end 0 -> end 1; IDs sorted ascending
    std::array<Vec2, 2> coords{};
    std::array<int, 2> vertex_markers{};
    int marker = 0;                        // derived boundary marker (0 = interior)
    std::vector<FaceNeighborInfo> faces;   // adjacent faces (1 or 2), ID-sorted
};

struct FaceInfo {
    std::array<PrimitiveID, 3> vertices{}; // CCW
    std::array<Vec2, 3> coords{};
    std::array<int, 3> vertex_markers{};
    std::array<PrimitiveID, 3> edges{};    // by slot
    std::array<bool, 3> edge_aligned{};    // by slot
    std::array<int, 3> edge_markers{};     // by slot
    int region = 0;
};

struct SetupPrimitive {
    PrimitiveID id;
    PrimitiveKind kind = PrimitiveKind::VERTEX;
    std::variant<VertexInfo, EdgeInfo, FaceInfo> info;

    const VertexInfo& vertex() const { return std::get<VertexInfo>(info); }
    const EdgeInfo& edge() const { return std::get<EdgeInfo>(info); }
    const FaceInfo& face() const { return std::get<FaceInfo>(info); }
};

/// Process-global macro-primitive graph built from a coarse mesh. IDs are
/// dense: vertices [0, NV), edges [NV, NV+NE), faces [NV+NE, NV+NE+NT).
/// Communication graph edges connect only adjacent dimensions
/// (face <-> edge, edge <-> vertex); there are no face <-> face links.
struct SetupGraph {
    std::vector<SetupPrimitive> primitives; // indexed by ID value
    std::size_t num_vertices = 0;
    std::size_t num_edges = 0;
    std::size_t num_faces = 0;
    std::vector<std::pair<PrimitiveID, PrimitiveID>> graph_edges; // lower-dim first

    const SetupPrimitive& at(PrimitiveID id) const { return primitives.at(id.value); }
    PrimitiveKind kind_of(PrimitiveID id) const { return at(id).kind; }
    std::size_t size() const { return primitives.size(); }

    PrimitiveID vertex_id(std::size_t i) const { return PrimitiveID{i}; }
    PrimitiveID edge_id(std::size_t i) const { return PrimitiveID{num_vertices + i}; }
    PrimitiveID face_id(std::size_t i) const { return PrimitiveID{num_vertices + num_edges + i}; }
};

/// Deterministic graph construction: identical input yields identical IDs and
/// adjacency. Throws std::invalid_argument for non-manifold meshes (an edge
/// shared by more than two triangles).
SetupGraph build_setup_graph(const UnstructuredMesh& mesh);

} // namespace hytegrid
