#include "drapegeom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "drapegeom/parallel.hpp"

namespace drapegeom {

namespace {

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct EdgeRecord {
    int faces[2] = {-1, -1};
    int opposite[2] = {-1, -1};
    // true when the face traverses the edge as (min -> max)
    bool forward[2] = {false, false};
    int count = 0;
};

// Squared-area threshold below which a face counts as zero-area: matched
// against 1e-12 * avgEdge^2 on the 2A = |cross| scale.
double zero_area_cross_threshold(double avgEdge) {
    const double t = 1e-12 * avgEdge * avgEdge;
    return t * t;  // compared against |cross|^2
}

}  // namespace

TriMesh build_mesh(std::vector<Vec3> positions, std::vector<Tri> triangles) {
    TriMesh mesh;
    const int nv = static_cast<int>(positions.size());
    if (triangles.empty()) throw DegenerateTriangle("mesh has no triangles");

    for (std::size_t f = 0; f < triangles.size(); ++f) {
        const Tri& t = triangles[f];
        for (int c = 0; c < 3; ++c) {
            const int idx = t[c];
            if (idx < 0 || idx >= nv)
                throw IndexOutOfRange("triangle " + std::to_string(f) + " references vertex " +
                                      std::to_string(idx) + " out of " + std::to_string(nv));
        }
        if (t.a == t.b || t.b == t.c || t.a == t.c)
            throw DegenerateTriangle("triangle " + std::to_string(f) + " repeats a vertex index");
    }

    mesh.positions = std::move(positions);
    mesh.triangles = std::move(triangles);

    const auto& tris = mesh.triangles;
    NeighborhoodTables& tab = mesh.tables;
    tab.oneRing.assign(nv, {});
    tab.ringEdges.assign(nv, {});
    tab.faceRing.assign(nv, {});
    tab.boundaryVertex.assign(nv, 0);

    std::unordered_map<std::uint64_t, EdgeRecord> edgeMap;
    edgeMap.reserve(tris.size() * 3);

    for (std::size_t f = 0; f < tris.size(); ++f) {
        const Tri& t = tris[f];
        for (int c = 0; c < 3; ++c) {
            const int u = t[c];
            const int v = t[(c + 1) % 3];
            const int w = t[(c + 2) % 3];
            EdgeRecord& rec = edgeMap[edge_key(u, v)];
            if (rec.count < 2) {
                rec.faces[rec.count] = static_cast<int>(f);
                rec.opposite[rec.count] = w;
                rec.forward[rec.count] = (u < v);
            }
            rec.count++;
            tab.faceRing[u].push_back({static_cast<int>(f), c});
        }
    }

    // Deterministic edge order regardless of hash-map iteration.
    std::vector<std::uint64_t> keys;
    keys.reserve(edgeMap.size());
    for (const auto& [k, _] : edgeMap) keys.push_back(k);
    std::sort(keys.begin(), keys.end());

    tab.edges.reserve(keys.size());
    for (const std::uint64_t k : keys) {
        const int a = static_cast<int>(k >> 32);
        const int b = static_cast<int>(k & 0xffffffffu);
        const EdgeRecord& rec = edgeMap[k];
        tab.edges.emplace_back(a, b);

        if (rec.count > 2) mesh.validation.nonManifoldEdges.emplace_back(a, b);
        if (rec.count == 1) {
            mesh.validation.boundaryEdgeCount++;
            tab.boundaryVertex[a] = 1;
            tab.boundaryVertex[b] = 1;
        }
        // For consistent orientation the two incident faces traverse the edge
        // in opposite directions.
        if (rec.count == 2 && rec.forward[0] == rec.forward[1])
            mesh.validation.inconsistentEdges.emplace_back(a, b);

        RingEdge reA, reB;
        reA.neighbor = b;
        reB.neighbor = a;
        const int nf = std::min(rec.count, 2);
        reA.faceCount = reB.faceCount = nf;
        for (int s = 0; s < nf; ++s) {
            reA.opposite[s] = reB.opposite[s] = rec.opposite[s];
            reA.face[s] = reB.face[s] = rec.faces[s];
        }
        if (nf == 2 && reA.face[0] > reA.face[1]) {
            std::swap(reA.face[0], reA.face[1]);
            std::swap(reA.opposite[0], reA.opposite[1]);
            reB = reA;
            reB.neighbor = a;
        }
        tab.oneRing[a].push_back(b);
        tab.oneRing[b].push_back(a);
        tab.ringEdges[a].push_back(reA);
        tab.ringEdges[b].push_back(reB);
    }

    for (int v = 0; v < nv; ++v) {
        auto& ring = tab.oneRing[v];
        auto& redges = tab.ringEdges[v];
        std::vector<std::size_t> order(ring.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&ring](std::size_t x, std::size_t y) { return ring[x] < ring[y]; });
        std::vector<int> ringSorted(ring.size());
        std::vector<RingEdge> redgesSorted(redges.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            ringSorted[i] = ring[order[i]];
            redgesSorted[i] = redges[order[i]];
        }
        ring = std::move(ringSorted);
        redges = std::move(redgesSorted);
        if (ring.empty()) mesh.validation.isolatedVertices.push_back(v);
    }

    // Unordered vertex pairs at graph distance exactly 2: share a common
    // neighbor and are not themselves edge-connected.
    std::vector<std::uint64_t> pairKeys;
    for (int j = 0; j < nv; ++j) {
        const auto& ring = tab.oneRing[j];
        for (std::size_t x = 0; x < ring.size(); ++x) {
            for (std::size_t y = x + 1; y < ring.size(); ++y) {
                const int i = ring[x];
                const int k = ring[y];
                if (!edgeMap.count(edge_key(i, k))) pairKeys.push_back(edge_key(i, k));
            }
        }
    }
    std::sort(pairKeys.begin(), pairKeys.end());
    pairKeys.erase(std::unique(pairKeys.begin(), pairKeys.end()), pairKeys.end());
    tab.twoEdgePairs.reserve(pairKeys.size());
    for (const std::uint64_t k : pairKeys)
        tab.twoEdgePairs.emplace_back(static_cast<int>(k >> 32),
                                      static_cast<int>(k & 0xffffffffu));

    // Zero-area scan, threshold scaled by the average edge length.
    double edgeSum = 0.0;
    for (const auto& [a, b] : tab.edges)
        edgeSum += (mesh.positions[a] - mesh.positions[b]).norm();
    const double avgEdge = edgeSum / static_cast<double>(tab.edges.size());
    const double crossSqTol = zero_area_cross_threshold(avgEdge);
    for (std::size_t f = 0; f < tris.size(); ++f) {
        const Tri& t = tris[f];
        const Vec3 u = mesh.positions[t.b] - mesh.positions[t.a];
        const Vec3 v = mesh.positions[t.c] - mesh.positions[t.a];
        if (u.cross(v).squaredNorm() <= crossSqTol)
            mesh.validation.zeroAreaFaces.push_back(static_cast<int>(f));
    }

    return mesh;
}

TriMesh with_positions(const TriMesh& mesh, std::vector<Vec3> positions) {
    if (positions.size() != mesh.positions.size())
        throw VertexCountMismatch("with_positions: vertex count changed");
    return build_mesh(std::move(positions), mesh.triangles);
}

FacetNormals facet_normals(const TriMesh& mesh) {
    FacetNormals out;
    const std::size_t nf = mesh.faceCount();
    out.normals.assign(nf, Vec3::Zero());
    out.zeroArea.assign(nf, 0);
    const double crossSqTol = zero_area_cross_threshold(average_edge_length(mesh));

    parallel_for_each(nf, [&](std::size_t f) {
        const Tri& t = mesh.triangles[f];
        const Vec3 u = mesh.positions[t.b] - mesh.positions[t.a];
        const Vec3 v = mesh.positions[t.c] - mesh.positions[t.a];
        const Vec3 cr = u.cross(v);
        const double sq = cr.squaredNorm();
        if (sq <= crossSqTol) {
            out.zeroArea[f] = 1;
        } else {
            out.normals[f] = cr / std::sqrt(sq);
        }
    });
    for (std::size_t f = 0; f < nf; ++f) out.zeroAreaCount += out.zeroArea[f];
    return out;
}

std::vector<std::array<double, 3>> corner_angles(const TriMesh& mesh) {
    std::vector<std::array<double, 3>> angles(mesh.faceCount());
    parallel_for_each(mesh.faceCount(), [&](std::size_t f) {
        const Tri& t = mesh.triangles[f];
        for (int c = 0; c < 3; ++c) {
            const Vec3& p = mesh.positions[t[c]];
            const Vec3 u = mesh.positions[t[(c + 1) % 3]] - p;
            const Vec3 v = mesh.positions[t[(c + 2) % 3]] - p;
            angles[f][c] = std::atan2(u.cross(v).norm(), u.dot(v));
        }
    });
    return angles;
}

VertexNormals vertex_normals(const TriMesh& mesh) {
    VertexNormals out;
    const std::size_t nv = mesh.vertexCount();
    out.normals.assign(nv, Vec3::Zero());
    out.isolated.assign(nv, 0);

    const FacetNormals fn = facet_normals(mesh);
    const auto angles = corner_angles(mesh);

    parallel_for_each(nv, [&](std::size_t v) {
        Vec3 acc = Vec3::Zero();
        for (const FaceCorner& fc : mesh.tables.faceRing[v]) {
            if (fn.zeroArea[fc.face]) continue;
            acc += angles[fc.face][fc.corner] * fn.normals[fc.face];
        }
        const double n = acc.norm();
        if (n <= 1e-300) {
            out.isolated[v] = 1;
        } else {
            out.normals[v] = acc / n;
        }
    });
    return out;
}

std::vector<double> mixed_area(const TriMesh& mesh) {
    const std::size_t nv = mesh.vertexCount();
    std::vector<double> area(nv, 0.0);

    for (const Tri& t : mesh.triangles) {
        const Vec3& pa = mesh.positions[t.a];
        const Vec3& pb = mesh.positions[t.b];
        const Vec3& pc = mesh.positions[t.c];
        const double doubleArea = (pb - pa).cross(pc - pa).norm();
        const double faceArea = 0.5 * doubleArea;

        // dot of the two edge vectors leaving each corner; negative = obtuse
        const double da = (pb - pa).dot(pc - pa);
        const double db = (pc - pb).dot(pa - pb);
        const double dc = (pa - pc).dot(pb - pc);

        if (doubleArea <= 1e-300) {
            // degenerate face: split evenly so the partition stays exact
            const double third = faceArea / 3.0;
            area[t.a] += third;
            area[t.b] += third;
            area[t.c] += third;
            continue;
        }

        if (da < 0.0 || db < 0.0 || dc < 0.0) {
            const double half = 0.5 * faceArea;
            const double quarter = 0.25 * faceArea;
            area[t.a] += (da < 0.0) ? half : quarter;
            area[t.b] += (db < 0.0) ? half : quarter;
            area[t.c] += (dc < 0.0) ? half : quarter;
        } else {
            // Voronoi region: (|e_ij|^2 cot(theta_k) + |e_ik|^2 cot(theta_j)) / 8
            const double cotA = da / doubleArea;
            const double cotB = db / doubleArea;
            const double cotC = dc / doubleArea;
            const double ab = (pb - pa).squaredNorm();
            const double bc = (pc - pb).squaredNorm();
            const double ca = (pa - pc).squaredNorm();
            area[t.a] += 0.125 * (ab * cotC + ca * cotB);
            area[t.b] += 0.125 * (ab * cotC + bc * cotA);
            area[t.c] += 0.125 * (ca * cotB + bc * cotA);
        }
    }
    return area;
}

double average_edge_length(const TriMesh& mesh) {
    const auto& edges = mesh.tables.edges;
    if (edges.empty()) throw NoEdges("mesh has no edges");
    std::vector<double> lengths(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
        lengths[i] = (mesh.positions[edges[i].first] - mesh.positions[edges[i].second]).norm();
    return pairwise_sum(lengths) / static_cast<double>(lengths.size());
}

double surface_area(const TriMesh& mesh) {
    std::vector<double> areas(mesh.faceCount());
    for (std::size_t f = 0; f < mesh.faceCount(); ++f) {
        const Tri& t = mesh.triangles[f];
        const Vec3 u = mesh.positions[t.b] - mesh.positions[t.a];
        const Vec3 v = mesh.positions[t.c] - mesh.positions[t.a];
        areas[f] = 0.5 * u.cross(v).norm();
    }
    return pairwise_sum(areas);
}

}  // namespace drapegeom
