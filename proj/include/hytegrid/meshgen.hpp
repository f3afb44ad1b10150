#pragma once

#include <string>

namespace hytegrid::meshgen {

/// Generators emit the ASCII mesh-file format understood by parse_mesh(),
/// so fixtures round-trip through the parser like user-provided meshes.

/// Single reference right triangle (0,0)-(1,0)-(0,1), boundary marker 1.
std::string unit_triangle();

/// Unit square split along the (0,0)-(1,1) diagonal; boundary marker 1.
std::string unit_square();

/// Unit square with the second triangle's corner rotation chosen so that the
/// shared diagonal runs against that face's border walk (reversed
/// orientation fixture).
std::string unit_square_reversed();

/// Square ring of 8 triangles around a square hole (genus-1 fixture);
/// outer boundary marker 1, inner boundary marker 2.
std::string square_ring8();

/// Rectangle [0,width]x[0,height] as nx-by-ny squares, two triangles each.
/// Markers: left = 1 (inflow, including its corners), top/bottom = 2
/// (walls, including the right corners), right interior = 3 (outflow).
std::string channel(int nx, int ny, double width = 2.0, double height = 1.0);

/// Annulus (polygonal) with `segments` angular divisions and `layers` radial
/// layers: 2*segments*layers triangles. Inner boundary marker 1, outer
/// marker 2.
std::string annulus(int segments, int layers, double r_inner = 0.55, double r_outer = 1.0);

} // namespace hytegrid::meshgen
