#pragma once

#include <cmath>
#include <vector>

#include "drapegeom/mesh.hpp"

namespace dtest {

using drapegeom::Tri;
using drapegeom::TriMesh;
using drapegeom::Vec3;

inline TriMesh single_triangle() {
    return drapegeom::build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
}

inline TriMesh tetrahedron() {
    return drapegeom::build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                                 {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
}

// Six unit equilateral triangles around a center vertex.
inline TriMesh equilateral_fan() {
    std::vector<Vec3> pos = {{0, 0, 0}};
    for (int k = 0; k < 6; ++k) {
        const double th = k * M_PI / 3.0;
        pos.emplace_back(std::cos(th), std::sin(th), 0.0);
    }
    std::vector<Tri> tris;
    for (int k = 0; k < 6; ++k) tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
    return drapegeom::build_mesh(std::move(pos), std::move(tris));
}

// Unit cube, CCW outward faces.
inline TriMesh cube() {
    std::vector<Vec3> p = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                           {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    std::vector<Tri> t = {
        {0, 2, 1}, {0, 3, 2},  // bottom (-z)
        {4, 5, 6}, {4, 6, 7},  // top (+z)
        {0, 1, 5}, {0, 5, 4},  // -y
        {2, 3, 7}, {2, 7, 6},  // +y
        {1, 2, 6}, {1, 6, 5},  // +x
        {3, 0, 4}, {3, 4, 7},  // -x
    };
    return drapegeom::build_mesh(std::move(p), std::move(t));
}

inline TriMesh flip_windings(const TriMesh& mesh) {
    std::vector<Tri> tris = mesh.triangles;
    for (Tri& t : tris) std::swap(t.b, t.c);
    return drapegeom::build_mesh(mesh.positions, std::move(tris));
}

inline TriMesh translated(const TriMesh& mesh, const Vec3& t) {
    std::vector<Vec3> pos = mesh.positions;
    for (Vec3& p : pos) p += t;
    return drapegeom::with_positions(mesh, std::move(pos));
}

inline TriMesh scaled(const TriMesh& mesh, double s) {
    std::vector<Vec3> pos = mesh.positions;
    for (Vec3& p : pos) p *= s;
    return drapegeom::with_positions(mesh, std::move(pos));
}

}  // namespace dtest
