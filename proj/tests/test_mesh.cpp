#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numbers>
#include <set>

#include "drapegeom/scene.hpp"
#include "test_support.hpp"

using namespace drapegeom;
using dtest::cube;
using dtest::equilateral_fan;
using dtest::single_triangle;
using dtest::tetrahedron;

TEST_CASE("build_mesh: single triangle") {
    const TriMesh m = single_triangle();
    CHECK(m.vertexCount() == 3);
    CHECK(m.faceCount() == 1);
    for (int v = 0; v < 3; ++v) CHECK(m.tables.oneRing[v].size() == 2);
    CHECK(m.validation.zeroAreaFaces.empty());
    CHECK(m.validation.orientationConsistent());
}

TEST_CASE("build_mesh: rejects repeated index") {
    CHECK_THROWS_AS(build_mesh({{0, 0, 0}, {1, 0, 0}}, {{0, 0, 1}}), DegenerateTriangle);
}

TEST_CASE("build_mesh: rejects out-of-range index") {
    CHECK_THROWS_AS(build_mesh({{0, 0, 0}, {1, 0, 0}}, {{0, 1, 2}}), IndexOutOfRange);
}

TEST_CASE("build_mesh: tetrahedron adjacency") {
    const TriMesh m = tetrahedron();
    for (int v = 0; v < 4; ++v) CHECK(m.tables.oneRing[v].size() == 3);
    CHECK(m.tables.twoEdgePairs.empty());  // every pair is adjacent
    CHECK(m.validation.orientationConsistent());
    CHECK(m.validation.boundaryEdgeCount == 0);
}

TEST_CASE("build_mesh: warnings for zero-area, non-manifold, inconsistent winding") {
    // face 1 is collinear; faces 0 and 2 traverse edge (1,2) the same way
    const TriMesh m = build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 0, 0}},
                                 {{0, 1, 2}, {0, 1, 4}, {3, 1, 2}});
    CHECK(m.validation.zeroAreaFaces.size() == 1);
    CHECK_FALSE(m.validation.orientationConsistent());

    const TriMesh nm = build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, -1, 0}},
                                  {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}});
    CHECK(nm.validation.nonManifoldEdges.size() == 1);  // edge (0,1) has 3 faces
}

TEST_CASE("one-ring symmetry and two-edge pair properties") {
    const TriMesh m = make_wrinkled_plane(7, 6, 1.0, 0.2, 3.0, 0);
    const auto& tab = m.tables;
    for (std::size_t i = 0; i < m.vertexCount(); ++i) {
        for (const int j : tab.oneRing[i]) {
            const auto& back = tab.oneRing[j];
            CHECK(std::find(back.begin(), back.end(), static_cast<int>(i)) != back.end());
        }
    }
    std::set<std::pair<int, int>> ringPairs;
    for (std::size_t i = 0; i < m.vertexCount(); ++i)
        for (const int j : tab.oneRing[i])
            ringPairs.insert({std::min<int>(i, j), std::max<int>(i, j)});
    std::set<std::pair<int, int>> twoPairs(tab.twoEdgePairs.begin(), tab.twoEdgePairs.end());
    CHECK(twoPairs.size() == tab.twoEdgePairs.size());  // deduplicated
    for (const auto& [i, k] : tab.twoEdgePairs) {
        CHECK(i != k);
        CHECK(ringPairs.count({i, k}) == 0);
        bool common = false;
        for (const int j : tab.oneRing[i])
            if (std::find(tab.oneRing[k].begin(), tab.oneRing[k].end(), j) !=
                tab.oneRing[k].end())
                common = true;
        CHECK(common);
    }
}

TEST_CASE("rebuilding adjacency yields identical structure") {
    const TriMesh m = make_capsule(1.5, 2.0, 10);
    const TriMesh r = build_mesh(m.positions, m.triangles);
    CHECK(r.tables.oneRing == m.tables.oneRing);
    CHECK(r.tables.twoEdgePairs == m.tables.twoEdgePairs);
    CHECK(r.tables.edges == m.tables.edges);
}

TEST_CASE("corner angles of every face sum to pi") {
    for (const TriMesh& m : {make_icosphere(2, 1.0), make_wrinkled_plane(6, 6, 1.0, 0.3, 2.5),
                             make_capsule(2.0, 3.0, 12)}) {
        const auto angles = corner_angles(m);
        for (const auto& a : angles)
            CHECK(std::abs(a[0] + a[1] + a[2] - std::numbers::pi) < 1e-9);
    }
}

TEST_CASE("facet normals: plane, winding flip, hand cross product") {
    const TriMesh m = single_triangle();
    const FacetNormals fn = facet_normals(m);
    CHECK((fn.normals[0] - Vec3(0, 0, 1)).norm() < 1e-15);

    const TriMesh rev = dtest::flip_windings(m);
    CHECK((facet_normals(rev).normals[0] - Vec3(0, 0, -1)).norm() < 1e-15);

    const TriMesh slant = build_mesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 1}}, {{0, 1, 2}});
    const Vec3 expected = Vec3(0, -1, 1) / std::sqrt(2.0);
    CHECK((facet_normals(slant).normals[0] - expected).norm() < 1e-12);
}

TEST_CASE("facet normals are unit; flipping windings negates all") {
    const TriMesh m = make_icosphere(2, 1.0);
    const FacetNormals fn = facet_normals(m);
    for (const Vec3& n : fn.normals) CHECK(std::abs(n.norm() - 1.0) < 1e-12);
    const FacetNormals fr = facet_normals(dtest::flip_windings(m));
    for (std::size_t f = 0; f < fn.normals.size(); ++f)
        CHECK((fn.normals[f] + fr.normals[f]).norm() < 1e-15);
}

TEST_CASE("vertex normals: flat grid, icosphere, cube corner") {
    const TriMesh grid = make_plane_grid(5, 5, 1.0);
    const VertexNormals vn = vertex_normals(grid);
    const int interior = 2 * 5 + 2;
    CHECK((vn.normals[interior] - Vec3(0, 0, 1)).norm() < 1e-14);

    const TriMesh sphere = make_icosphere(3, 1.0);
    const VertexNormals sn = vertex_normals(sphere);
    for (std::size_t v = 0; v < sphere.vertexCount(); ++v) {
        const Vec3 radial = sphere.positions[v].normalized();
        const double angle = std::acos(std::clamp(sn.normals[v].dot(radial), -1.0, 1.0));
        CHECK(angle < 1.0 * std::numbers::pi / 180.0);
    }

    const TriMesh box = cube();
    const VertexNormals bn = vertex_normals(box);
    const Vec3 diag = Vec3(1, 1, 1) / std::sqrt(3.0);
    CHECK((bn.normals[6] - diag).norm() < 1e-6);  // corner (1,1,1)
}

TEST_CASE("mixed area: equilateral fan, partition, right-angle corner") {
    const TriMesh fan = equilateral_fan();
    const auto area = mixed_area(fan);
    CHECK(area[0] == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));

    const TriMesh grid = make_plane_grid(6, 4, 0.7);
    const auto ga = mixed_area(grid);
    double sum = 0.0;
    for (const double a : ga) sum += a;
    CHECK(sum == doctest::Approx(surface_area(grid)).epsilon(1e-12));

    const TriMesh right = single_triangle();  // right angle at vertex 0, legs 1
    const auto ra = mixed_area(right);
    CHECK(ra[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("mixed area partitions every mesh") {
    const TriMesh meshes[] = {make_icosphere(3, 1.0), make_capsule(1.5, 2.0, 14),
                              make_wrinkled_plane(8, 7, 0.9, 0.4, 2.0, 1)};
    for (const TriMesh& m : meshes) {
        const auto areas = mixed_area(m);
        double sum = 0.0;
        for (const double a : areas) sum += a;
        CHECK(std::abs(sum - surface_area(m)) <= 1e-9 * surface_area(m));
    }
}

TEST_CASE("average edge length: equilateral, 3-4-5, scale homogeneity") {
    CHECK(average_edge_length(equilateral_fan()) == doctest::Approx(1.0).epsilon(1e-12));

    const TriMesh right345 = build_mesh({{0, 0, 0}, {3, 0, 0}, {0, 4, 0}}, {{0, 1, 2}});
    CHECK(average_edge_length(right345) == doctest::Approx(4.0).epsilon(1e-12));

    const TriMesh m = make_wrinkled_plane(5, 5, 1.0, 0.2, 2.0);
    const double base = average_edge_length(m);
    CHECK(average_edge_length(dtest::scaled(m, 2.5)) ==
          doctest::Approx(2.5 * base).epsilon(1e-12));
}
