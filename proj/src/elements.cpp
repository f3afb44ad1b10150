#include "hytegrid/elements.hpp"

#include <cmath>
#include <string>

namespace hytegrid {

namespace {

constexpr double kPspgDelta = 1.0 / 12.0;

struct TriangleGeometry {
    double area = 0; // unsigned
    std::array<Vec2, 3> grad{}; // barycentric gradients, orientation-safe
};

TriangleGeometry geometry(const std::array<Vec2, 3>& tri) {
    const Vec2 u1 = tri[1] - tri[0];
    const Vec2 u2 = tri[2] - tri[0];
    const double det = cross(u1, u2);
    if (det == 0.0)
        throw std::invalid_argument("local_stiffness: zero-area triangle");
    TriangleGeometry g;
    g.area = std::abs(det) / 2.0;
    g.grad[1] = {u2.y / det, -u2.x / det};
    g.grad[2] = {-u1.y / det, u1.x / det};
    g.grad[0] = {-g.grad[1].x - g.grad[2].x, -g.grad[1].y - g.grad[2].y};
    return g;
}

ElementMatrix p1_matrix(Form form, const TriangleGeometry& g) {
    ElementMatrix m;
    m.k = 3;
    switch (form) {
    case Form::LAPLACE:
    case Form::PSPG: {
        // PSPG element block is -delta * h_T^2 * (grad q, grad p) with
        // h_T^2 = 2|T| (the squared leg of the right-isoceles micro-triangles
        // produced by structured refinement).
        const double s = form == Form::LAPLACE ? g.area : -kPspgDelta * 2.0 * g.area * g.area;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = s * dot(g.grad[static_cast<std::size_t>(i)],
                                         g.grad[static_cast<std::size_t>(j)]);
                m.at(i, j) = v;
                m.at(j, i) = v;
            }
        return m;
    }
    case Form::MASS:
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.at(i, j) = i == j ? g.area / 6.0 : g.area / 12.0;
        return m;
    case Form::DIV_X:
    case Form::DIV_Y: {
        // -(q, d* u): the test row integrates a hat (area/3), the trial
        // derivative is constant.
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const Vec2 gj = g.grad[static_cast<std::size_t>(j)];
                m.at(i, j) = -(g.area / 3.0) * (form == Form::DIV_X ? gj.x : gj.y);
            }
        return m;
    }
    case Form::GRAD_X:
    case Form::GRAD_Y: {
        const ElementMatrix d = p1_matrix(form == Form::GRAD_X ? Form::DIV_X : Form::DIV_Y, g);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.at(i, j) = d.at(j, i);
        return m;
    }
    }
    throw std::invalid_argument("local_stiffness: bad form");
}

// 6-point degree-4 rule on the reference triangle, barycentric points and
// normalized weights (sum 1).
struct QuadPoint {
    std::array<double, 3> l;
    double w;
};

constexpr double kA1 = 0.44594849091596489;
constexpr double kW1 = 0.22338158967801147;
constexpr double kA2 = 0.091576213509770743;
constexpr double kW2 = 0.10995174365532187;

constexpr std::array<QuadPoint, 6> kQuadrature{{
    {{1.0 - 2.0 * kA1, kA1, kA1}, kW1},
    {{kA1, 1.0 - 2.0 * kA1, kA1}, kW1},
    {{kA1, kA1, 1.0 - 2.0 * kA1}, kW1},
    {{1.0 - 2.0 * kA2, kA2, kA2}, kW2},
    {{kA2, 1.0 - 2.0 * kA2, kA2}, kW2},
    {{kA2, kA2, 1.0 - 2.0 * kA2}, kW2},
}};

void p2_basis(const TriangleGeometry& g, const std::array<double, 3>& l,
              std::array<double, 6>& phi, std::array<Vec2, 6>& grad) {
    for (std::size_t i = 0; i < 3; ++i) {
        phi[i] = l[i] * (2.0 * l[i] - 1.0);
        grad[i] = (4.0 * l[i] - 1.0) * g.grad[i];
    }
    static constexpr std::size_t pair[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (std::size_t e = 0; e < 3; ++e) {
        const std::size_t i = pair[e][0], j = pair[e][1];
        phi[3 + e] = 4.0 * l[i] * l[j];
        grad[3 + e] = 4.0 * l[j] * g.grad[i] + 4.0 * l[i] * g.grad[j];
    }
}

ElementMatrix p2_matrix(Form form, const TriangleGeometry& g) {
    ElementMatrix m;
    m.k = 6;
    if (form == Form::GRAD_X || form == Form::GRAD_Y) {
        const ElementMatrix d = p2_matrix(form == Form::GRAD_X ? Form::DIV_X : Form::DIV_Y, g);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                m.at(i, j) = d.at(j, i);
        return m;
    }
    const bool symmetric = form == Form::LAPLACE || form == Form::MASS || form == Form::PSPG;
    const double scale = form == Form::PSPG ? -kPspgDelta * 2.0 * g.area : 1.0;
    std::array<double, 6> phi{};
    std::array<Vec2, 6> grad{};
    for (const auto& q : kQuadrature) {
        p2_basis(g, q.l, phi, grad);
        const double w = q.w * g.area * scale;
        for (int i = 0; i < 6; ++i) {
            const int jmax = symmetric ? i : 5;
            for (int j = 0; j <= jmax; ++j) {
                double integrand = 0;
                switch (form) {
                case Form::LAPLACE:
                case Form::PSPG:
                    integrand = dot(grad[static_cast<std::size_t>(i)],
                                    grad[static_cast<std::size_t>(j)]);
                    break;
                case Form::MASS:
                    integrand = phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
                    break;
                case Form::DIV_X:
                    integrand = -phi[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(j)].x;
                    break;
                case Form::DIV_Y:
                    integrand = -phi[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(j)].y;
                    break;
                default:
                    throw std::invalid_argument("local_stiffness: bad form");
                }
                m.at(i, j) += w * integrand;
            }
        }
    }
    if (symmetric)
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < i; ++j)
                m.at(j, i) = m.at(i, j);
    return m;
}

} // namespace

const char* to_string(Form f) {
    switch (f) {
    case Form::LAPLACE: return "LAPLACE";
    case Form::MASS: return "MASS";
    case Form::DIV_X: return "DIV_X";
    case Form::DIV_Y: return "DIV_Y";
    case Form::GRAD_X: return "GRAD_X";
    case Form::GRAD_Y: return "GRAD_Y";
    case Form::PSPG: return "PSPG";
    }
    return "?";
}

ElementMatrix local_stiffness(Form form, FunctionKind kind, const std::array<Vec2, 3>& tri) {
    const TriangleGeometry g = geometry(tri);
    switch (kind) {
    case FunctionKind::P1: return p1_matrix(form, g);
    case FunctionKind::P2: return p2_matrix(form, g);
    case FunctionKind::DG0:
        throw std::invalid_argument("local_stiffness: DG0 carries no element matrices");
    }
    throw std::invalid_argument("local_stiffness: bad kind");
}

} // namespace hytegrid
