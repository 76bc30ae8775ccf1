#pragma once

// Evaluation metrics between predicted and ground-truth drapes, precision
// curves, and interpenetration diagnostics.

#include <span>
#include <vector>

#include "drapegeom/losses.hpp"
#include "drapegeom/mesh.hpp"

namespace drapegeom {

// Mean vertex-to-vertex distance (cm).
double e_dist(const TriMesh& pred, const TriMesh& gt);

// Mean facet-normal angle error (degrees); the arccos argument is clamped to
// [-1, 1]. Faces flagged zero-area on either mesh are skipped.
double e_norm(const TriMesh& pred, const TriMesh& gt, long* skippedFaces = nullptr);

// 100 * |vec(G) - vec(P)| / |vec(G)| after jointly scaling both meshes into
// [0,1] by the ground-truth bounding box. Throws DegenerateBoundingBox.
double normalized_l2_pct(const TriMesh& pred, const TriMesh& gt);

enum class PrecisionKind { distance, angle };

struct PrecisionPoint {
    double threshold = 0.0;  // cm or degrees
    double fraction = 0.0;   // in [0,1]
};

// Fraction of per-vertex distances (or per-face angles) below each threshold.
std::vector<PrecisionPoint> precision_curve(const TriMesh& pred, const TriMesh& gt,
                                            std::span<const double> thresholds,
                                            PrecisionKind kind);

// Multi-scene variant: pooled over all elements, or averaged per sample.
struct ScenePair {
    const TriMesh* pred;
    const TriMesh* gt;
};

std::vector<PrecisionPoint> precision_curve_multi(std::span<const ScenePair> scenes,
                                                  std::span<const double> thresholds,
                                                  PrecisionKind kind,
                                                  bool perSampleAverage = false);

struct PenetrationReport {
    long count = 0;
    std::vector<int> vertices;    // offending garment vertices
    std::vector<double> depths;   // cm, positive, parallel to vertices
};

// Garment vertices on the inward side of their nearest offset body point.
PenetrationReport penetration_count(const TriMesh& garment, const TriMesh& body,
                                    double bodyOffsetFraction = 0.20);

struct EvalReport {
    double eDist = 0.0;
    double eNorm = 0.0;
    double normalizedL2Pct = 0.0;
    long penetrationCount = -1;  // -1 when no body supplied
    std::vector<PrecisionPoint> distanceCurve;
    std::vector<PrecisionPoint> angleCurve;
};

EvalReport evaluate(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                    std::span<const double> distThresholds,
                    std::span<const double> angleThresholds,
                    double bodyOffsetFraction = 0.20);

}  // namespace drapegeom
