#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace hytegrid {

enum class PrimitiveKind : std::uint8_t { VERTEX = 0, EDGE = 1, FACE = 2 };

inline const char* to_string(PrimitiveKind k) {
    switch (k) {
    case PrimitiveKind::VERTEX: return "VERTEX";
    case PrimitiveKind::EDGE: return "EDGE";
    case PrimitiveKind::FACE: return "FACE";
    }
    return "?";
}

/// Globally unique primitive identifier. IDs are assigned in dense blocks at
/// setup time: vertices first, then edges, then faces, so the ID alone does
/// not reveal the kind; the graph does.
struct PrimitiveID {
    std::uint64_t value = 0;

    auto operator<=>(const PrimitiveID&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const PrimitiveID& id) {
    return os << id.value;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    auto operator<=>(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

} // namespace hytegrid

template <> struct std::hash<hytegrid::PrimitiveID> {
    std::size_t operator()(const hytegrid::PrimitiveID& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
