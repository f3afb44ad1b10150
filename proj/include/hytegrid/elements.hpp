#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "hytegrid/ids.hpp"
#include "hytegrid/indexing.hpp"

namespace hytegrid {

/// Bilinear forms the stencil machinery can discretize. DIV/GRAD follow the
/// sign convention of the stabilized Stokes weak form: momentum rows carry
/// GRAD_* = -(p, d* v), continuity rows carry DIV_* = -(q, d* u), and PSPG is
/// the stabilization block -delta*h_T^2*(grad q, grad p) with delta = 1/12 and
/// h_T^2 = 2|T|, so GRAD = DIV^T and PSPG is symmetric negative semi-definite.
enum class Form : std::uint8_t {
    LAPLACE = 0,
    MASS = 1,
    DIV_X = 2,
    DIV_Y = 3,
    GRAD_X = 4,
    GRAD_Y = 5,
    PSPG = 6,
};

const char* to_string(Form f);

/// Dense element matrix of one micro-triangle: k = 3 (P1, rows/cols ordered
/// v0,v1,v2) or k = 6 (P2, ordered v0,v1,v2,m01,m12,m20 with m_ij the midpoint
/// of edge v_i-v_j).
struct ElementMatrix {
    int k = 3;
    std::array<std::array<double, 6>, 6> a{};

    double& at(int i, int j) {
        if (i < 0 || j < 0 || i >= k || j >= k)
            throw std::out_of_range("ElementMatrix::at: index outside k x k block");
        return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    double at(int i, int j) const {
        if (i < 0 || j < 0 || i >= k || j >= k)
            throw std::out_of_range("ElementMatrix::at: index outside k x k block");
        return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
};

/// Element matrix of `form` on the triangle (counter- or clockwise). P1 uses
/// closed-form constant gradients and is exact; P2 integrates with a 6-point
/// degree-4 rule, exact for every shipped form. Symmetric forms return
/// bitwise-symmetric matrices and GRAD_* is the bitwise transpose of DIV_*.
/// Throws std::invalid_argument for DG0 or a zero-area triangle.
ElementMatrix local_stiffness(Form form, FunctionKind kind, const std::array<Vec2, 3>& tri);

} // namespace hytegrid
