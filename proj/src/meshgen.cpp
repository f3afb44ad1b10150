#include "hytegrid/meshgen.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hytegrid::meshgen {

namespace {

struct Builder {
    std::vector<std::array<double, 2>> verts;
    std::vector<int> markers;
    std::vector<std::array<int, 4>> tris; // v0 v1 v2 region

    int vertex(double x, double y, int marker) {
        verts.push_back({x, y});
        markers.push_back(marker);
        return static_cast<int>(verts.size()) - 1;
    }
    void tri(int a, int b, int c, int region = 0) { tris.push_back({a, b, c, region}); }

    std::string str(const std::string& header_comment) const {
        std::ostringstream os;
        os.precision(17);
        os << "# " << header_comment << "\n";
        os << verts.size() << " " << tris.size() << "\n";
        for (std::size_t i = 0; i < verts.size(); ++i)
            os << verts[i][0] << " " << verts[i][1] << " " << markers[i] << "\n";
        for (const auto& t : tris)
            os << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
        return os.str();
    }
};

} // namespace

std::string unit_triangle() {
    Builder b;
    b.vertex(0, 0, 1);
    b.vertex(1, 0, 1);
    b.vertex(0, 1, 1);
    b.tri(0, 1, 2);
    return b.str("reference right triangle");
}

std::string unit_square() {
    Builder b;
    b.vertex(0, 0, 1);
    b.vertex(1, 0, 1);
    b.vertex(1, 1, 1);
    b.vertex(0, 1, 1);
    b.tri(0, 1, 2);
    b.tri(0, 2, 3);
    return b.str("unit square, two triangles");
}

std::string unit_square_reversed() {
    Builder b;
    b.vertex(0, 0, 1);
    b.vertex(1, 0, 1);
    b.vertex(1, 1, 1);
    b.vertex(0, 1, 1);
    b.tri(0, 1, 2);
    // Rotated corner order: the shared diagonal {0,2} sits at this face's
    // slot 1 with walk 2 -> 0, against the intrinsic 0 -> 2 direction.
    b.tri(2, 3, 0);
    return b.str("unit square, reversed shared-edge orientation");
}

std::string square_ring8() {
    Builder b;
    const int o0 = b.vertex(0, 0, 1), o1 = b.vertex(3, 0, 1), o2 = b.vertex(3, 3, 1), o3 = b.vertex(0, 3, 1);
    const int i0 = b.vertex(1, 1, 2), i1 = b.vertex(2, 1, 2), i2 = b.vertex(2, 2, 2), i3 = b.vertex(1, 2, 2);
    b.tri(o0, o1, i1);
    b.tri(o0, i1, i0);
    b.tri(o1, o2, i2);
    b.tri(o1, i2, i1);
    b.tri(o2, o3, i3);
    b.tri(o2, i3, i2);
    b.tri(o3, o0, i0);
    b.tri(o3, i0, i3);
    return b.str("square ring of 8 triangles (one hole)");
}

std::string channel(int nx, int ny, double width, double height) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("channel: nx and ny must be >= 1");
    Builder b;
    auto idx = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            // Left column entirely inflow (the inflow profile vanishes at the
            // walls, so its corners are value-consistent with no-slip); right
            // corners stay walls so the outflow edges resolve to marker 3
            // while the corner points remain pinned.
            int marker = 0;
            if (i == 0)
                marker = 1;
            else if (j == 0 || j == ny)
                marker = 2;
            else if (i == nx)
                marker = 3;
            b.vertex(width * i / nx, height * j / ny, marker);
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = idx(i, j), c = idx(i + 1, j), d = idx(i + 1, j + 1), e = idx(i, j + 1);
            b.tri(a, c, d);
            b.tri(a, d, e);
        }
    return b.str("channel");
}

std::string annulus(int segments, int layers, double r_inner, double r_outer) {
    if (segments < 3 || layers < 1)
        throw std::invalid_argument("annulus: need segments >= 3 and layers >= 1");
    if (!(0.0 < r_inner && r_inner < r_outer))
        throw std::invalid_argument("annulus: need 0 < r_inner < r_outer");
    Builder b;
    auto idx = [&](int ring, int s) { return ring * segments + (s % segments); };
    for (int ring = 0; ring <= layers; ++ring) {
        const double r = r_inner + (r_outer - r_inner) * ring / layers;
        const int marker = ring == 0 ? 1 : (ring == layers ? 2 : 0);
        for (int s = 0; s < segments; ++s) {
            const double a = 2.0 * std::numbers::pi * s / segments;
            b.vertex(r * std::cos(a), r * std::sin(a), marker);
        }
    }
    for (int ring = 0; ring < layers; ++ring)
        for (int s = 0; s < segments; ++s) {
            const int a = idx(ring, s), c = idx(ring, s + 1);
            const int d = idx(ring + 1, s), e = idx(ring + 1, s + 1);
            b.tri(a, c, e);
            b.tri(a, e, d);
        }
    return b.str("annulus " + std::to_string(segments) + "x" + std::to_string(layers));
}

} // namespace hytegrid::meshgen
