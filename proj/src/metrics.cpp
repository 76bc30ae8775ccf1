#include "drapegeom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drapegeom/parallel.hpp"
#include "drapegeom/spatial.hpp"

namespace drapegeom {

double e_dist(const TriMesh& pred, const TriMesh& gt) {
    require_same_vertex_count(pred, gt);
    const std::size_t n = pred.vertexCount();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = (gt.positions[i] - pred.positions[i]).norm();
    return pairwise_sum(d) / static_cast<double>(n);
}

namespace {

std::vector<double> facet_angles_deg(const TriMesh& pred, const TriMesh& gt, long* skipped) {
    if (pred.faceCount() != gt.faceCount())
        throw FaceCountMismatch("e_norm: face counts differ");
    const FacetNormals pn = facet_normals(pred);
    const FacetNormals gn = facet_normals(gt);
    std::vector<double> angles;
    angles.reserve(pred.faceCount());
    long skip = 0;
    for (std::size_t f = 0; f < pred.faceCount(); ++f) {
        if (pn.zeroArea[f] || gn.zeroArea[f]) {
            skip++;
            continue;
        }
        // difference form of the dot: exact 1 at identity, exact -1 at a flip
        const double d = std::clamp(1.0 - 0.5 * (gn.normals[f] - pn.normals[f]).squaredNorm(),
                                    -1.0, 1.0);
        angles.push_back(std::acos(d) * 180.0 / std::numbers::pi);
    }
    if (skipped) *skipped += skip;
    return angles;
}

}  // namespace

double e_norm(const TriMesh& pred, const TriMesh& gt, long* skippedFaces) {
    const auto angles = facet_angles_deg(pred, gt, skippedFaces);
    if (angles.empty()) return 0.0;
    return pairwise_sum(angles) / static_cast<double>(angles.size());
}

double normalized_l2_pct(const TriMesh& pred, const TriMesh& gt) {
    require_same_vertex_count(pred, gt);
    Vec3 lo = gt.positions[0], hi = gt.positions[0];
    for (const Vec3& p : gt.positions) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec3 extent = hi - lo;
    for (int a = 0; a < 3; ++a)
        if (extent[a] <= 0.0)
            throw DegenerateBoundingBox("ground-truth bounding box has zero extent on axis " +
                                        std::to_string(a));

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gt.vertexCount(); ++i) {
        const Vec3 g = (gt.positions[i] - lo).cwiseQuotient(extent);
        const Vec3 p = (pred.positions[i] - lo).cwiseQuotient(extent);
        num += (g - p).squaredNorm();
        den += g.squaredNorm();
    }
    if (den <= 0.0) throw DegenerateBoundingBox("normalized ground truth is all zeros");
    return 100.0 * std::sqrt(num) / std::sqrt(den);
}

namespace {

std::vector<double> precision_samples(const TriMesh& pred, const TriMesh& gt,
                                      PrecisionKind kind) {
    if (kind == PrecisionKind::distance) {
        require_same_vertex_count(pred, gt);
        std::vector<double> d(pred.vertexCount());
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = (gt.positions[i] - pred.positions[i]).norm();
        return d;
    }
    return facet_angles_deg(pred, gt, nullptr);
}

std::vector<PrecisionPoint> curve_from_samples(std::span<const double> samples,
                                               std::span<const double> thresholds) {
    std::vector<PrecisionPoint> curve;
    curve.reserve(thresholds.size());
    for (const double t : thresholds) {
        std::size_t below = 0;
        for (const double s : samples)
            if (s < t) below++;
        curve.push_back({t, samples.empty()
                                ? 0.0
                                : static_cast<double>(below) / static_cast<double>(samples.size())});
    }
    return curve;
}

}  // namespace

std::vector<PrecisionPoint> precision_curve(const TriMesh& pred, const TriMesh& gt,
                                            std::span<const double> thresholds,
                                            PrecisionKind kind) {
    const auto samples = precision_samples(pred, gt, kind);
    return curve_from_samples(samples, thresholds);
}

std::vector<PrecisionPoint> precision_curve_multi(std::span<const ScenePair> scenes,
                                                  std::span<const double> thresholds,
                                                  PrecisionKind kind, bool perSampleAverage) {
    if (!perSampleAverage) {
        std::vector<double> pooled;
        for (const ScenePair& sc : scenes) {
            const auto s = precision_samples(*sc.pred, *sc.gt, kind);
            pooled.insert(pooled.end(), s.begin(), s.end());
        }
        return curve_from_samples(pooled, thresholds);
    }
    std::vector<PrecisionPoint> acc;
    for (const double t : thresholds) acc.push_back({t, 0.0});
    for (const ScenePair& sc : scenes) {
        const auto c = precision_curve(*sc.pred, *sc.gt, thresholds, kind);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i].fraction += c[i].fraction;
    }
    if (!scenes.empty())
        for (auto& p : acc) p.fraction /= static_cast<double>(scenes.size());
    return acc;
}

PenetrationReport penetration_count(const TriMesh& garment, const TriMesh& body,
                                    double bodyOffsetFraction) {
    PenetrationReport report;
    const VertexNormals vn = vertex_normals(body);
    const double offset = bodyOffsetFraction * average_edge_length(body);
    const CorrespondenceSet corr = nearest_correspondences(garment, body);
    for (std::size_t j = 0; j < garment.vertexCount(); ++j) {
        const int bi = corr.pairs[j].second;
        const Vec3 offsetPoint = body.positions[bi] + offset * vn.normals[bi];
        const double sd = vn.normals[bi].dot(garment.positions[j] - offsetPoint);
        if (sd < 0.0) {
            report.count++;
            report.vertices.push_back(static_cast<int>(j));
            report.depths.push_back(-sd);
        }
    }
    return report;
}

EvalReport evaluate(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                    std::span<const double> distThresholds,
                    std::span<const double> angleThresholds, double bodyOffsetFraction) {
    EvalReport report;
    report.eDist = e_dist(pred, gt);
    report.eNorm = e_norm(pred, gt);
    report.normalizedL2Pct = normalized_l2_pct(pred, gt);
    if (body) report.penetrationCount = penetration_count(pred, *body, bodyOffsetFraction).count;
    if (!distThresholds.empty())
        report.distanceCurve = precision_curve(pred, gt, distThresholds, PrecisionKind::distance);
    if (!angleThresholds.empty())
        report.angleCurve = precision_curve(pred, gt, angleThresholds, PrecisionKind::angle);
    return report;
}

}  // namespace drapegeom
