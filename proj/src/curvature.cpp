#include "drapegeom/curvature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "drapegeom/parallel.hpp"

namespace drapegeom {

double CurvatureField::meanUnflagged(const std::vector<double>& values) const {
    std::vector<double> kept;
    kept.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!flagged[i]) kept.push_back(values[i]);
    if (kept.empty()) return 0.0;
    return pairwise_sum(kept) / static_cast<double>(kept.size());
}

CurvatureField gaussian_curvature(const TriMesh& mesh) {
    CurvatureField out;
    out.kind = CurvatureKind::gaussian;
    const std::size_t nv = mesh.vertexCount();
    out.scalars.assign(nv, 0.0);
    out.flagged.assign(nv, 0);

    const auto angles = corner_angles(mesh);
    const auto areas = mixed_area(mesh);

    parallel_for_each(nv, [&](std::size_t v) {
        // The angle-deficit formula is an interior identity; boundary and
        // isolated vertices are flagged out of aggregates.
        if (mesh.tables.boundaryVertex[v] || mesh.tables.faceRing[v].empty()) {
            out.flagged[v] = 1;
            return;
        }
        if (areas[v] <= 0.0) {
            out.flagged[v] = 1;
            return;
        }
        double sum = 0.0;
        for (const FaceCorner& fc : mesh.tables.faceRing[v]) sum += angles[fc.face][fc.corner];
        out.scalars[v] = (2.0 * std::numbers::pi - sum) / areas[v];
    });
    return out;
}

CurvatureField mean_curvature_normal(const TriMesh& mesh) {
    CurvatureField out;
    out.kind = CurvatureKind::meanNormal;
    const std::size_t nv = mesh.vertexCount();
    out.vectors.assign(nv, Vec3::Zero());
    out.flagged.assign(nv, 0);

    const auto areas = mixed_area(mesh);
    std::atomic<long> clamps{0};

    parallel_for_each(nv, [&](std::size_t v) {
        if (mesh.tables.boundaryVertex[v] || mesh.tables.faceRing[v].empty()) {
            out.flagged[v] = 1;
            return;
        }
        if (areas[v] <= 0.0) {
            out.flagged[v] = 1;
            return;
        }
        Vec3 acc = Vec3::Zero();
        const Vec3& xi = mesh.positions[v];
        for (const RingEdge& re : mesh.tables.ringEdges[v]) {
            double w = 0.0;
            for (int s = 0; s < re.faceCount; ++s) {
                const Vec3& xo = mesh.positions[re.opposite[s]];
                const Vec3 u = xi - xo;
                const Vec3 q = mesh.positions[re.neighbor] - xo;
                const double cross = u.cross(q).norm();
                double cot;
                if (cross <= 1e-300) {
                    cot = u.dot(q) >= 0.0 ? kCotClamp : -kCotClamp;
                    clamps.fetch_add(1, std::memory_order_relaxed);
                } else {
                    cot = u.dot(q) / cross;
                    if (cot > kCotClamp) {
                        cot = kCotClamp;
                        clamps.fetch_add(1, std::memory_order_relaxed);
                    } else if (cot < -kCotClamp) {
                        cot = -kCotClamp;
                        clamps.fetch_add(1, std::memory_order_relaxed);
                    }
                }
                w += cot;
            }
            acc += w * (mesh.positions[re.neighbor] - xi);
        }
        // Meyer normalization: 1/(2 A_mixed) makes |kappa| = 2H on smooth
        // surfaces (2/r on a radius-r sphere).
        out.vectors[v] = acc / (2.0 * areas[v]);
    });
    out.clampEvents = clamps.load();
    return out;
}

CurvatureField uniform_laplacian_curvature(const TriMesh& mesh) {
    CurvatureField out;
    out.kind = CurvatureKind::uniformLaplacian;
    const std::size_t nv = mesh.vertexCount();
    out.vectors.assign(nv, Vec3::Zero());
    out.flagged.assign(nv, 0);

    parallel_for_each(nv, [&](std::size_t v) {
        const auto& ring = mesh.tables.oneRing[v];
        if (ring.empty()) {
            out.flagged[v] = 1;  // isolated
            return;
        }
        Vec3 acc = Vec3::Zero();
        for (const int j : ring) acc += mesh.positions[j] - mesh.positions[v];
        out.vectors[v] = acc / static_cast<double>(ring.size());
    });
    return out;
}

NeighborhoodCovariance neighborhood_covariance(std::span<const Vec3> positions,
                                               const PointIndex& index, int vertex, int K) {
    NeighborhoodCovariance out;
    const auto hits = index.knn(positions[vertex], K);
    out.neighbors.reserve(hits.size());
    Vec3 mean = Vec3::Zero();
    for (const KnnHit& h : hits) {
        out.neighbors.push_back(h.index);
        mean += positions[h.index];
    }
    mean /= static_cast<double>(K);
    Mat3 sigma = Mat3::Zero();
    for (const int j : out.neighbors) {
        const Vec3 g = positions[j] - mean;
        sigma += g * g.transpose();
    }
    out.sigma = sigma / static_cast<double>(K);
    out.mean = mean;
    return out;
}

NeighborhoodCovariance neighborhood_covariance(const TriMesh& mesh, int vertex, int K) {
    PointIndex index(mesh.positions);
    return neighborhood_covariance(mesh.positions, index, vertex, K);
}

CurvatureField eigen_curvature(const TriMesh& mesh, int K) {
    CurvatureField out;
    out.kind = CurvatureKind::eigen;
    out.K = K;
    const std::size_t nv = mesh.vertexCount();
    if (K < 1 || static_cast<std::size_t>(K) > nv)
        throw KTooLarge("eigen_curvature: K=" + std::to_string(K));
    out.eigenvalues.assign(nv, {0.0, 0.0, 0.0});
    out.flagged.assign(nv, 0);

    PointIndex index(mesh.positions);
    parallel_for_each(nv, [&](std::size_t v) {
        const auto cov =
            neighborhood_covariance(mesh.positions, index, static_cast<int>(v), K);
        Eigen::SelfAdjointEigenSolver<Mat3> solver(cov.sigma);
        if (solver.info() != Eigen::Success) {
            out.flagged[v] = 1;
            return;
        }
        const Vec3 ev = solver.eigenvalues();  // ascending
        out.eigenvalues[v] = {ev[0], ev[1], ev[2]};
    });
    return out;
}

double rq_eps_squared(double avgEdgeLength) { return 1e-12 * avgEdgeLength * avgEdgeLength; }

RqNeighborhoods make_rq_neighborhoods(const TriMesh& mesh, int K) {
    const std::size_t nv = mesh.vertexCount();
    if (K < 1 || static_cast<std::size_t>(K) > nv)
        throw KTooLarge("rq neighborhoods: K=" + std::to_string(K));
    RqNeighborhoods out;
    out.K = K;
    out.neighbors.assign(nv, {});
    PointIndex index(mesh.positions);
    parallel_for_each(nv, [&](std::size_t v) {
        const auto hits = index.knn(mesh.positions[v], K);
        auto& nb = out.neighbors[v];
        nb.reserve(hits.size());
        for (const KnnHit& h : hits) nb.push_back(h.index);
    });
    return out;
}

RqValues rayleigh_values(std::span<const Vec3> positions, const RqNeighborhoods& nbhd,
                         double epsSq) {
    const std::size_t nv = nbhd.neighbors.size();
    RqValues out;
    out.rqMin.assign(nv, 0.0);
    out.rqMax.assign(nv, 0.0);
    out.argMin.assign(nv, -1);
    out.argMax.assign(nv, -1);
    out.degenerate.assign(nv, 0);

    parallel_for_each(nv, [&](std::size_t v) {
        const auto& nb = nbhd.neighbors[v];
        Vec3 mean = Vec3::Zero();
        for (const int j : nb) mean += positions[j];
        mean /= static_cast<double>(nbhd.K);
        Mat3 sigma = Mat3::Zero();
        for (const int j : nb) {
            const Vec3 g = positions[j] - mean;
            sigma += g * g.transpose();
        }
        sigma /= static_cast<double>(nbhd.K);

        double lo = 0.0, hi = 0.0;
        int argLo = -1, argHi = -1;
        for (const int j : nb) {
            const Vec3 g = positions[j] - mean;
            const double den = g.squaredNorm();
            if (den <= epsSq) continue;  // the centered point vanished
            const double q = g.dot(sigma * g) / den;
            if (argLo < 0 || q < lo) {
                lo = q;
                argLo = j;
            }
            if (argHi < 0 || q > hi) {
                hi = q;
                argHi = j;
            }
        }
        if (argLo < 0) {
            out.degenerate[v] = 1;
            return;
        }
        out.rqMin[v] = lo;
        out.rqMax[v] = hi;
        out.argMin[v] = argLo;
        out.argMax[v] = argHi;
    });
    return out;
}

CurvatureField rayleigh_curvature(const TriMesh& mesh, int K) {
    CurvatureField out;
    out.kind = CurvatureKind::rayleigh;
    out.K = K;
    const auto nbhd = make_rq_neighborhoods(mesh, K);
    const double epsSq = rq_eps_squared(average_edge_length(mesh));
    auto vals = rayleigh_values(mesh.positions, nbhd, epsSq);
    out.rqMin = std::move(vals.rqMin);
    out.rqMax = std::move(vals.rqMax);
    out.rqArgMin = std::move(vals.argMin);
    out.rqArgMax = std::move(vals.argMax);
    out.flagged.assign(vals.degenerate.begin(), vals.degenerate.end());
    return out;
}

}  // namespace drapegeom
