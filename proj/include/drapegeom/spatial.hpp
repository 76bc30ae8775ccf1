#pragma once

// Exact nearest-neighbor machinery. Every query is defined to return exactly
// what a brute-force scan with lowest-index tie-break would return, so results
// are reproducible across runs and platforms.

#include <span>
#include <vector>

#include "drapegeom/mesh.hpp"

namespace drapegeom {

struct KnnHit {
    int index = -1;
    double distance = 0.0;  // cm
};

// kd-tree over a point set. Immutable after construction; concurrent queries
// are fine.
class PointIndex {
public:
    explicit PointIndex(std::vector<Vec3> points);  // throws EmptyPointSet

    // K nearest, ascending (distance, index). Throws KTooLarge.
    std::vector<KnnHit> knn(const Vec3& query, int k) const;
    KnnHit nearest(const Vec3& query) const;

    const std::vector<Vec3>& points() const { return points_; }
    int size() const { return static_cast<int>(points_.size()); }

private:
    struct Node {
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into order_
        int axis = 0;
        double split = 0.0;
    };

    int build(int begin, int end);
    void search(int node, const Vec3& q, int k, std::vector<KnnHit>& heap) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

PointIndex build_index(std::vector<Vec3> points);

struct CorrespondenceSet {
    // (garmentIndex, bodyIndex) per garment vertex, in garment order.
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> distances;  // cm, parallel to pairs
};

// Nearest body vertex for every garment vertex.
CorrespondenceSet nearest_correspondences(const TriMesh& garment, const TriMesh& body);
CorrespondenceSet nearest_correspondences(std::span<const Vec3> garment, const PointIndex& body);

// Farthest-point sampling, seeded at index 0, keeps ceil(n/factor) points.
// Ties broken by lowest index; deterministic.
std::vector<int> downsample_points(std::span<const Vec3> points, int factor);

// Component-wise max over each query's K nearest neighbors' feature vectors.
std::vector<std::vector<double>> knn_max_pool(const std::vector<std::vector<double>>& features,
                                              const PointIndex& index,
                                              std::span<const Vec3> queries, int k);

// Average-pool variant of the same gather.
std::vector<std::vector<double>> knn_avg_pool(const std::vector<std::vector<double>>& features,
                                              const PointIndex& index,
                                              std::span<const Vec3> queries, int k);

// Reference scan used by tests and available as a cross-check.
std::vector<KnnHit> brute_force_knn(std::span<const Vec3> points, const Vec3& query, int k);

}  // namespace drapegeom
