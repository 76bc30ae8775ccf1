#include "drapegeom/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drapegeom/parallel.hpp"

namespace drapegeom {

namespace {

struct Hit {
    double d2;
    int index;
};

// "better" = closer, lower index on exact ties
inline bool better(const Hit& a, const Hit& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

constexpr int kLeafSize = 16;

}  // namespace

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw EmptyPointSet("point index requires at least one point");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(2 * points_.size() / kLeafSize + 4);
    root_ = build(0, static_cast<int>(points_.size()));
}

PointIndex build_index(std::vector<Vec3> points) { return PointIndex(std::move(points)); }

int PointIndex::build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = points_[order_[begin]], hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double pa = points_[a][axis], pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                     });
    nodes_[id].axis = axis;
    nodes_[id].split = points_[order_[mid]][axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void PointIndex::search(int nodeId, const Vec3& q, int k, std::vector<KnnHit>& heap) const {
    // heap holds KnnHit with .distance = squared distance, max-heap by
    // (d2, index) so heap.front() is the current worst
    auto worse = [](const KnnHit& a, const KnnHit& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    };
    const Node& node = nodes_[nodeId];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = order_[i];
            const double d2 = (points_[idx] - q).squaredNorm();
            const KnnHit cand{idx, d2};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), worse);
            } else if (worse(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), worse);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), worse);
            }
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta <= 0.0 ? node.left : node.right;
    const int far = delta <= 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // Visit the far side unless it provably cannot improve the heap. Equality
    // must recurse: an equidistant point with a lower index still wins a tie.
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front().distance)
        search(far, q, k, heap);
}

std::vector<KnnHit> PointIndex::knn(const Vec3& query, int k) const {
    if (k < 1 || k > size())
        throw KTooLarge("knn: k=" + std::to_string(k) + " with " + std::to_string(size()) +
                        " points");
    std::vector<KnnHit> heap;
    heap.reserve(k);
    search(root_, query, k, heap);
    std::sort(heap.begin(), heap.end(), [](const KnnHit& a, const KnnHit& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    });
    for (KnnHit& h : heap) h.distance = std::sqrt(h.distance);
    return heap;
}

KnnHit PointIndex::nearest(const Vec3& query) const { return knn(query, 1)[0]; }

std::vector<KnnHit> brute_force_knn(std::span<const Vec3> points, const Vec3& query, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > points.size())
        throw KTooLarge("brute_force_knn: k out of range");
    std::vector<Hit> all(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        all[i] = {(points[i] - query).squaredNorm(), static_cast<int>(i)};
    std::partial_sort(all.begin(), all.begin() + k, all.end(), better);
    std::vector<KnnHit> out(k);
    for (int i = 0; i < k; ++i) out[i] = {all[i].index, std::sqrt(all[i].d2)};
    return out;
}

CorrespondenceSet nearest_correspondences(std::span<const Vec3> garment,
                                          const PointIndex& body) {
    CorrespondenceSet out;
    out.pairs.resize(garment.size());
    out.distances.resize(garment.size());
    parallel_for_each(garment.size(), [&](std::size_t g) {
        const KnnHit hit = body.nearest(garment[g]);
        out.pairs[g] = {static_cast<int>(g), hit.index};
        out.distances[g] = hit.distance;
    });
    return out;
}

CorrespondenceSet nearest_correspondences(const TriMesh& garment, const TriMesh& body) {
    PointIndex index(body.positions);
    return nearest_correspondences(garment.positions, index);
}

std::vector<int> downsample_points(std::span<const Vec3> points, int factor) {
    if (factor < 1) throw InvalidConfig("downsample factor must be >= 1");
    const std::size_t n = points.size();
    if (n == 0) return {};
    const std::size_t keep = (n + factor - 1) / factor;

    std::vector<int> selected;
    selected.reserve(keep);
    selected.push_back(0);
    std::vector<double> minD2(n);
    for (std::size_t i = 0; i < n; ++i) minD2[i] = (points[i] - points[0]).squaredNorm();

    while (selected.size() < keep) {
        std::size_t best = 0;
        double bestD2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (minD2[i] > bestD2) {
                bestD2 = minD2[i];
                best = i;
            }
        }
        selected.push_back(static_cast<int>(best));
        for (std::size_t i = 0; i < n; ++i)
            minD2[i] = std::min(minD2[i], (points[i] - points[best]).squaredNorm());
    }
    return selected;
}

namespace {

std::vector<std::vector<double>> knn_pool(const std::vector<std::vector<double>>& features,
                                          const PointIndex& index, std::span<const Vec3> queries,
                                          int k, bool maxPool) {
    if (features.size() != static_cast<std::size_t>(index.size()))
        throw InvalidConfig("knn pool: features not parallel to index points");
    const std::size_t dim = features.empty() ? 0 : features[0].size();
    for (const auto& f : features)
        if (f.size() != dim) throw InvalidConfig("knn pool: ragged feature vectors");

    std::vector<std::vector<double>> out(queries.size());
    parallel_for_each(queries.size(), [&](std::size_t q) {
        const auto hits = index.knn(queries[q], k);
        std::vector<double> acc(dim, maxPool ? -std::numeric_limits<double>::infinity() : 0.0);
        for (const KnnHit& h : hits) {
            const auto& f = features[h.index];
            for (std::size_t d = 0; d < dim; ++d)
                acc[d] = maxPool ? std::max(acc[d], f[d]) : acc[d] + f[d];
        }
        if (!maxPool && k > 0)
            for (double& v : acc) v /= static_cast<double>(k);
        out[q] = std::move(acc);
    });
    return out;
}

}  // namespace

std::vector<std::vector<double>> knn_max_pool(const std::vector<std::vector<double>>& features,
                                              const PointIndex& index,
                                              std::span<const Vec3> queries, int k) {
    return knn_pool(features, index, queries, k, true);
}

std::vector<std::vector<double>> knn_avg_pool(const std::vector<std::vector<double>>& features,
                                              const PointIndex& index,
                                              std::span<const Vec3> queries, int k) {
    return knn_pool(features, index, queries, k, false);
}

}  // namespace drapegeom
