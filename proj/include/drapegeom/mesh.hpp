#pragma once

// Triangle-mesh substrate: validated topology, one-ring / two-edge
// neighborhood tables, normals and finite-volume vertex areas.
//
// Conventions:
// - Positions are in centimeters, double precision.
// - Triangles are CCW; the cross product of the first two edges is the
//   outward facet normal.
// - Indices are 0-based in memory (the OBJ layer converts from 1-based).
// - Meshes are immutable after build_mesh and safe to share across threads.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "drapegeom/errors.hpp"

namespace drapegeom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Tri {
    int a = 0, b = 0, c = 0;
    int operator[](int i) const { return i == 0 ? a : (i == 1 ? b : c); }
};

// Soft findings from build_mesh. Scanned/simulated garment meshes contain
// zero-area faces and the odd non-manifold edge in practice, so these warn
// instead of rejecting.
struct MeshValidation {
    std::vector<int> zeroAreaFaces;
    std::vector<std::pair<int, int>> nonManifoldEdges;   // >2 incident faces
    std::vector<std::pair<int, int>> inconsistentEdges;  // same winding on both sides
    std::vector<int> isolatedVertices;
    int boundaryEdgeCount = 0;
    bool orientationConsistent() const { return inconsistentEdges.empty(); }
};

// One entry per one-ring edge (i, neighbor): the vertices opposite the edge
// in its (up to two) incident faces. cot(alpha)/cot(beta) in the mean
// curvature formula are the angles at these vertices.
struct RingEdge {
    int neighbor = -1;
    std::array<int, 2> opposite{-1, -1};
    std::array<int, 2> face{-1, -1};
    int faceCount = 0;
};

// Incident face of a vertex together with the corner slot (0..2) the vertex
// occupies in that face. Interior angles are position-dependent and are
// computed on demand via corner_angles().
struct FaceCorner {
    int face = -1;
    int corner = 0;
};

struct NeighborhoodTables {
    std::vector<std::vector<int>> oneRing;           // edge-connected neighbors, sorted
    std::vector<std::vector<RingEdge>> ringEdges;    // parallel to oneRing
    std::vector<std::vector<FaceCorner>> faceRing;   // incident faces per vertex
    std::vector<std::pair<int, int>> twoEdgePairs;   // graph distance exactly 2, i < k, unique
    std::vector<std::pair<int, int>> edges;          // unique undirected edges, i < j
    std::vector<char> boundaryVertex;                // touches an edge with one incident face
};

struct TriMesh {
    std::vector<Vec3> positions;
    std::vector<Tri> triangles;
    NeighborhoodTables tables;
    MeshValidation validation;

    std::size_t vertexCount() const { return positions.size(); }
    std::size_t faceCount() const { return triangles.size(); }
};

// Validates indices, rejects degenerate triangles (repeated index), builds
// adjacency. Zero-area faces and non-manifold edges are recorded as warnings.
TriMesh build_mesh(std::vector<Vec3> positions, std::vector<Tri> triangles);

// Same topology, new positions. Adjacency is rebuilt from the shared triangle
// list; zero-area warnings are rescanned.
TriMesh with_positions(const TriMesh& mesh, std::vector<Vec3> positions);

struct FacetNormals {
    std::vector<Vec3> normals;     // unit, CCW orientation; zero vector when flagged
    std::vector<char> zeroArea;    // squared-area below threshold
    long zeroAreaCount = 0;
};

FacetNormals facet_normals(const TriMesh& mesh);

struct VertexNormals {
    std::vector<Vec3> normals;     // angle-weighted average of incident facet normals
    std::vector<char> isolated;    // no incident face with usable area
};

VertexNormals vertex_normals(const TriMesh& mesh);

// Meyer-style mixed Voronoi area per vertex (cm^2). Voronoi region for
// non-obtuse triangles; area/2 at the obtuse corner and area/4 elsewhere for
// obtuse triangles. Sums to the total surface area.
std::vector<double> mixed_area(const TriMesh& mesh);

// Mean length over unique edges (cm). Throws NoEdges.
double average_edge_length(const TriMesh& mesh);

// Interior angles per face, radians, indexed by corner slot.
std::vector<std::array<double, 3>> corner_angles(const TriMesh& mesh);

// Total facet area.
double surface_area(const TriMesh& mesh);

}  // namespace drapegeom
