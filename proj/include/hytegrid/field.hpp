#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hytegrid/indexing.hpp"
#include "hytegrid/layout.hpp"
#include "hytegrid/primitives.hpp"

namespace hytegrid {

/// Per-DoF classification, usable as a bitmask in operation masks.
enum class DoFFlag : std::uint8_t {
    INNER = 1,
    DIRICHLET = 2,
    NEUMANN = 4,
};

constexpr std::uint8_t ALL_DOF_FLAGS = 7;

inline std::uint8_t flag_bit(DoFFlag f) { return static_cast<std::uint8_t>(f); }

/// Boundary-marker to flag mapping. Marker 0 (interior) is always INNER;
/// markers without an entry default to DIRICHLET.
struct BoundaryConditions {
    std::map<int, DoFFlag> marker_flag;

    DoFFlag flag_for(int marker) const {
        if (marker == 0)
            return DoFFlag::INNER;
        const auto it = marker_flag.find(marker);
        return it == marker_flag.end() ? DoFFlag::DIRICHLET : it->second;
    }
};

/// Storage attached to one primitive for one scalar field: value and flag
/// arrays per level, sized and addressed per layout.hpp. Flags are computed
/// locally from the primitive's marker metadata; every ghost slot gets the
/// flag its owner computes, so copies agree without communication.
struct FieldData {
    std::map<int, std::vector<double>> values;
    std::map<int, std::vector<std::uint8_t>> flags;
};

/// Callbacks allocating/serializing FieldData for DistributedDomain::add_data;
/// serialization is byte-exact so migration preserves field state bit-for-bit.
DistributedDomain::DataCallbacks field_callbacks(FunctionKind kind, int min_level, int max_level,
                                                 BoundaryConditions bc, TriangleLayout layout);

std::vector<double>& field_values(Primitive& p, DataHandle h, int level);
const std::vector<double>& field_values(const Primitive& p, DataHandle h, int level);
std::vector<std::uint8_t>& field_flags(Primitive& p, DataHandle h, int level);
const std::vector<std::uint8_t>& field_flags(const Primitive& p, DataHandle h, int level);

/// Flag array for one primitive (exposed for tests; field_callbacks uses it).
std::vector<std::uint8_t> compute_flags(FunctionKind kind, PrimitiveKind pk,
                                        const std::variant<VertexInfo, EdgeInfo, FaceInfo>& info,
                                        int level, const BoundaryConditions& bc,
                                        const TriangleLayout& layout);

} // namespace hytegrid
