#pragma once

// Per-vertex curvature metrics on triangle meshes.
//
//   gaussian          angle deficit over mixed area         (1/cm^2)
//   meanNormal        cotangent Laplacian of position       (1/cm), vector
//   uniformLaplacian  uniform-weight Laplacian of position  (cm), vector
//   eigen             sorted eigenvalues of the K-NN covariance (cm^2)
//   rayleigh          min/max Rayleigh quotient over the centered
//                     K-NN neighborhood (cm^2)
//
// The eigen kind is a diagnostic bound for the rayleigh kind and is never
// differentiated. Flagged vertices (boundary for gaussian/meanNormal,
// isolated or degenerate elsewhere) are excluded from aggregate statistics.

#include <array>
#include <optional>
#include <vector>

#include "drapegeom/mesh.hpp"
#include "drapegeom/spatial.hpp"

namespace drapegeom {

enum class CurvatureKind { gaussian, meanNormal, uniformLaplacian, eigen, rayleigh };

struct CurvatureField {
    CurvatureKind kind;
    int K = 0;  // neighborhood size for eigen/rayleigh

    std::vector<double> scalars;                    // gaussian
    std::vector<Vec3> vectors;                      // meanNormal, uniformLaplacian
    std::vector<std::array<double, 3>> eigenvalues; // eigen, ascending
    std::vector<double> rqMin, rqMax;               // rayleigh
    std::vector<int> rqArgMin, rqArgMax;            // selected neighbor (vertex index)

    // Excluded from aggregates: boundary, isolated, zero-area, or degenerate.
    std::vector<char> flagged;
    long clampEvents = 0;  // cotangent clamps (meanNormal only)

    // Mean over unflagged vertices of the natural scalar for this kind
    // (value, |vector|, rqMin as stored).
    double meanUnflagged(const std::vector<double>& values) const;
};

// Cotangents in the mean-curvature weights are clamped to this magnitude;
// each clamp increments CurvatureField::clampEvents.
inline constexpr double kCotClamp = 1e4;

CurvatureField gaussian_curvature(const TriMesh& mesh);
CurvatureField mean_curvature_normal(const TriMesh& mesh);
CurvatureField uniform_laplacian_curvature(const TriMesh& mesh);

struct NeighborhoodCovariance {
    Mat3 sigma = Mat3::Zero();
    Vec3 mean = Vec3::Zero();
    std::vector<int> neighbors;  // K vertex indices, includes the center
};

// Covariance of the K spatially nearest vertices (the center is its own
// nearest neighbor and is part of the set).
NeighborhoodCovariance neighborhood_covariance(const TriMesh& mesh, int vertex, int K);
NeighborhoodCovariance neighborhood_covariance(std::span<const Vec3> positions,
                                               const PointIndex& index, int vertex, int K);

CurvatureField eigen_curvature(const TriMesh& mesh, int K);
CurvatureField rayleigh_curvature(const TriMesh& mesh, int K);

// Shared K-NN membership snapshot used by losses/gradients so both sides of
// an evaluation see identical neighborhoods.
struct RqNeighborhoods {
    int K = 0;
    std::vector<std::vector<int>> neighbors;  // per vertex, K indices
};

RqNeighborhoods make_rq_neighborhoods(const TriMesh& mesh, int K);

// Rayleigh min/max under a frozen membership. epsSq is the squared length
// below which a centered neighbor is skipped.
struct RqValues {
    std::vector<double> rqMin, rqMax;
    std::vector<int> argMin, argMax;
    std::vector<char> degenerate;
};

RqValues rayleigh_values(std::span<const Vec3> positions, const RqNeighborhoods& nbhd,
                         double epsSq);

// Squared skip threshold: 1e-12 * avgEdge^2 keeps the rule scale-covariant.
double rq_eps_squared(double avgEdgeLength);

}  // namespace drapegeom
